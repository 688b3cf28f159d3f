#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace lvc {

// Error taxonomy maps onto process exit codes: usage -> 1, data -> 2,
// integrity -> 3. Anything escaping uncaught is a bug.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UsageError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};
// Bitstream truncation, corruption, or weight-hash mismatch during decode.
struct IntegrityError : Error {
  using Error::Error;
};

namespace detail {
template <typename... Ts>
std::string format_msg(const Ts&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}
}  // namespace detail

#define LVC_CHECK(cond, ...)                                          \
  do {                                                                \
    if (!(cond))                                                      \
      throw ::lvc::DataError(::lvc::detail::format_msg(__VA_ARGS__)); \
  } while (0)

#define LVC_CHECK_INTEGRITY(cond, ...)                                     \
  do {                                                                     \
    if (!(cond))                                                           \
      throw ::lvc::IntegrityError(::lvc::detail::format_msg(__VA_ARGS__)); \
  } while (0)

// Global reproducibility switch. Defaults to on; the LVC_DETERMINISTIC
// environment variable ("0"/"1") overrides, and set_deterministic_mode wins
// over both. When on, worker pools are sized to a single thread so every
// floating point reduction happens in one fixed order. Kernels are written so
// results are bit-identical either way; the switch exists to keep scheduling
// out of the picture entirely.
bool deterministic_mode();
void set_deterministic_mode(bool on);

uint64_t fnv1a64(const void* data, size_t n, uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace lvc
