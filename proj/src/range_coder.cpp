#include "lvc/range_coder.h"

#include <algorithm>
#include <cmath>

namespace lvc {

namespace {
constexpr uint32_t kTopValue = 1u << 24;
constexpr uint32_t kTotal = 1u << kCdfPrecisionBits;
}  // namespace

void RangeEncoder::shift_low() {
  if (uint32_t(low_ >> 32) != 0 || uint32_t(low_) < 0xFF000000u) {
    uint8_t carry = uint8_t(low_ >> 32);
    do {
      out_.push_back(uint8_t(cache_ + carry));
      cache_ = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = uint8_t(uint32_t(low_) >> 24);
  }
  ++cache_size_;
  low_ = (low_ << 8) & 0xFFFFFFFFull;
}

void RangeEncoder::encode(uint32_t cum, uint32_t freq) {
  LVC_CHECK(freq > 0 && cum + freq <= kTotal, "invalid coder interval");
  range_ /= kTotal;
  low_ += uint64_t(cum) * range_;
  range_ *= freq;
  while (range_ < kTopValue) {
    shift_low();
    range_ <<= 8;
  }
}

void RangeEncoder::encode_bits(uint32_t value, int n) {
  LVC_CHECK(n > 0 && n <= 16 && value < (1u << n), "invalid raw bit write");
  range_ >>= n;
  low_ += uint64_t(value) * range_;
  while (range_ < kTopValue) {
    shift_low();
    range_ <<= 8;
  }
}

void RangeEncoder::finish() {
  LVC_CHECK(!finished_, "range encoder finished twice");
  finished_ = true;
  for (int i = 0; i < 5; ++i) shift_low();
}

RangeDecoder::RangeDecoder(const uint8_t* data, size_t n)
    : data_(data), n_(n) {
  // The first byte is always the encoder's initial zero cache byte.
  next_byte();
  for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
}

uint8_t RangeDecoder::next_byte() {
  LVC_CHECK_INTEGRITY(pos_ < n_, "entropy payload truncated at byte ", pos_);
  return data_[pos_++];
}

void RangeDecoder::normalize() {
  while (range_ < kTopValue) {
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

uint32_t RangeDecoder::decode_freq() {
  range_ /= kTotal;
  return std::min(code_ / range_, kTotal - 1);
}

void RangeDecoder::consume(uint32_t cum, uint32_t freq) {
  code_ -= cum * range_;
  range_ *= freq;
  normalize();
}

uint32_t RangeDecoder::decode_bits(int n) {
  range_ >>= n;
  uint32_t v = std::min(code_ / range_, (1u << n) - 1);
  code_ -= v * range_;
  normalize();
  return v;
}

SymbolAlphabet SymbolAlphabet::build(double mu, double sigma) {
  LVC_CHECK(std::isfinite(mu) && sigma > 0.0, "invalid alphabet parameters");
  const int center = int(std::lround(mu));
  const int radius =
      std::clamp(int(std::ceil(4.0 * sigma)) + 2, 2, 120);
  SymbolAlphabet a;
  a.lo = center - radius;
  a.hi = center + radius;
  const int nb = a.bins();

  // Real-valued bin masses, tail mass to the escape bin.
  std::vector<double> p(size_t(nb) + 1);
  double interior = 0.0;
  for (int i = 0; i < nb; ++i) {
    p[i] = gaussian_interval_probability(a.lo + i, mu, sigma, 0.0);
    interior += p[i];
  }
  p[nb] = std::max(1.0 - interior, 0.0);

  // Fixed point with every bin >= 1 so all symbols stay codable, then repair
  // the rounding drift on the largest bins. Deterministic by construction.
  std::vector<int64_t> f(size_t(nb) + 1);
  int64_t sum = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    f[i] = std::max<int64_t>(1, llround(p[i] * kTotal));
    sum += f[i];
  }
  while (sum != kTotal) {
    size_t best = 0;
    for (size_t i = 1; i < f.size(); ++i)
      if (f[i] > f[best]) best = i;
    if (sum > kTotal) {
      const int64_t cut = std::min(sum - kTotal, f[best] - 1);
      LVC_CHECK(cut > 0, "alphabet normalization failed");
      f[best] -= cut;
      sum -= cut;
    } else {
      f[best] += kTotal - sum;
      sum = kTotal;
    }
  }

  a.cum.resize(f.size() + 1);
  a.cum[0] = 0;
  for (size_t i = 0; i < f.size(); ++i)
    a.cum[i + 1] = a.cum[i] + uint32_t(f[i]);
  return a;
}

namespace {

uint32_t zigzag(int32_t v) { return (uint32_t(v) << 1) ^ uint32_t(v >> 31); }
int32_t unzigzag(uint32_t u) { return int32_t(u >> 1) ^ -int32_t(u & 1); }

}  // namespace

std::vector<uint8_t> encode_symbols(const LatentCode& code,
                                    const EntropyParams& params) {
  params.validate(code.shape);
  std::vector<uint8_t> out;
  if (code.v.empty()) return out;
  out.reserve(code.v.size() / 2 + 16);
  RangeEncoder rc(out);
  for (size_t i = 0; i < code.v.size(); ++i) {
    const SymbolAlphabet a =
        SymbolAlphabet::build(params.mean.v[i], params.scale.v[i]);
    const int32_t v = code.v[i];
    const int nb = a.bins();
    if (v >= a.lo && v <= a.hi) {
      const int bin = int(v - a.lo);
      rc.encode(a.cum[bin], a.cum[bin + 1] - a.cum[bin]);
    } else {
      rc.encode(a.cum[nb], a.cum[nb + 1] - a.cum[nb]);
      const uint32_t u = zigzag(v);
      rc.encode_bits(u >> 16, 16);
      rc.encode_bits(u & 0xFFFFu, 16);
    }
  }
  rc.finish();
  return out;
}

LatentCode decode_symbols(const uint8_t* data, size_t n, const Shape& shape,
                          const EntropyParams& params) {
  params.validate(shape);
  LatentCode code;
  code.shape = shape;
  code.v.resize(size_t(shape.numel()));
  if (code.v.empty()) return code;
  RangeDecoder rc(data, n);
  for (size_t i = 0; i < code.v.size(); ++i) {
    const SymbolAlphabet a =
        SymbolAlphabet::build(params.mean.v[i], params.scale.v[i]);
    const uint32_t f = rc.decode_freq();
    const auto it = std::upper_bound(a.cum.begin(), a.cum.end(), f);
    const int bin = int(it - a.cum.begin()) - 1;
    rc.consume(a.cum[bin], a.cum[bin + 1] - a.cum[bin]);
    if (bin < a.bins()) {
      code.v[i] = a.lo + bin;
    } else {
      const uint32_t u = (rc.decode_bits(16) << 16) | rc.decode_bits(16);
      code.v[i] = unzigzag(u);
    }
  }
  return code;
}

}  // namespace lvc
