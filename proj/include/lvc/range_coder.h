#pragma once

#include <cstdint>
#include <vector>

#include "lvc/entropy.h"

namespace lvc {

// Byte-oriented range coder with delayed carry resolution (cache plus a run
// counter of pending 0xFF bytes). Frequencies are 16-bit fixed point summing
// to exactly 1 << kCdfPrecisionBits. Instances are single-use per stream.
class RangeEncoder {
 public:
  explicit RangeEncoder(std::vector<uint8_t>& out) : out_(out) {}

  // Encode a symbol occupying [cum, cum + freq) of the 16-bit total.
  void encode(uint32_t cum, uint32_t freq);
  // Encode n raw bits (n <= 16) with a uniform model.
  void encode_bits(uint32_t value, int n);
  // Must be called exactly once; emits the trailing bytes.
  void finish();

 private:
  void shift_low();

  std::vector<uint8_t>& out_;
  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t cache_size_ = 1;
  bool finished_ = false;
};

class RangeDecoder {
 public:
  // Reads from [data, data + n). Throws IntegrityError on exhaustion.
  RangeDecoder(const uint8_t* data, size_t n);

  // Returns a frequency offset in [0, 1 << kCdfPrecisionBits); the caller
  // locates the symbol bin and then calls consume with its interval.
  uint32_t decode_freq();
  void consume(uint32_t cum, uint32_t freq);
  uint32_t decode_bits(int n);

 private:
  uint8_t next_byte();
  void normalize();

  const uint8_t* data_;
  size_t n_;
  size_t pos_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

// Quantized symbol alphabet for one Gaussian-conditioned element: integer
// bins centered on round(mu) with radius from sigma, plus an escape bin for
// outliers, which are then coded raw as zigzag 16-bit halves. Bin
// frequencies are >= 1 and sum to exactly 1 << kCdfPrecisionBits.
struct SymbolAlphabet {
  int lo = 0;
  int hi = 0;
  std::vector<uint32_t> cum;  // size = bins + 2; last interval is escape

  static SymbolAlphabet build(double mu, double sigma);
  int bins() const { return hi - lo + 1; }
};

// Entropy-code an integer latent against per-element Gaussian parameters.
// Encode and decode build identical alphabets from identical params, which
// is what makes the stream decodable.
std::vector<uint8_t> encode_symbols(const LatentCode& code,
                                    const EntropyParams& params);
LatentCode decode_symbols(const uint8_t* data, size_t n, const Shape& shape,
                          const EntropyParams& params);

}  // namespace lvc
