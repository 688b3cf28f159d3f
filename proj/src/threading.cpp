#include "lvc/threading.h"

#include <cstdlib>

#include "lvc/common.h"

namespace lvc {

namespace {

bool g_deterministic = [] {
  const char* env = std::getenv("LVC_DETERMINISTIC");
  if (env && env[0] == '0' && env[1] == '\0') return false;
  return true;
}();

}  // namespace

bool deterministic_mode() { return g_deterministic; }
void set_deterministic_mode(bool on) { g_deterministic = on; }

uint64_t fnv1a64(const void* data, size_t n, uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

int worker_count(int cap) {
  if (deterministic_mode()) return 1;
  const int hw = int(std::thread::hardware_concurrency());
  return std::max(1, std::min(cap, hw > 0 ? hw : 1));
}

void run_jobs(int n, const std::function<void(int)>& fn, int workers) {
  if (n <= 0) return;
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mu;
  for (int t = 0; t < workers; ++t)
    threads.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (const std::exception& e) {
          std::lock_guard lk(err_mu);
          if (!failed.exchange(true)) first_error = e.what();
          return;
        }
      }
    });
  for (auto& t : threads) t.join();
  if (failed.load()) throw Error(first_error);
}

}  // namespace lvc
