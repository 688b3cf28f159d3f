#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace lvc {

// Number of workers honoring the determinism switch: 1 when deterministic
// mode is on, otherwise min(hardware, cap).
int worker_count(int cap);

// Runs fn(i) for i in [0, n). With more than one worker, jobs are claimed
// from an atomic counter; each job must be independent (sequence-level
// parallelism: every job owns its buffers and coder instances).
void run_jobs(int n, const std::function<void(int)>& fn, int workers);

// Bounded producer/consumer queue for data prefetch. close() wakes consumers;
// pop returns nullopt once closed and drained.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(size_t cap) : cap_(cap) {}

  bool push(T item) {
    std::unique_lock lk(mu_);
    cv_space_.wait(lk, [&] { return q_.size() < cap_ || closed_; });
    if (closed_) return false;
    q_.push_back(std::move(item));
    cv_item_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lk(mu_);
    cv_item_.wait(lk, [&] { return !q_.empty() || closed_; });
    if (q_.empty()) return std::nullopt;
    T item = std::move(q_.front());
    q_.pop_front();
    cv_space_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    cv_item_.notify_all();
    cv_space_.notify_all();
  }

 private:
  size_t cap_;
  std::mutex mu_;
  std::condition_variable cv_item_, cv_space_;
  std::deque<T> q_;
  bool closed_ = false;
};

}  // namespace lvc
