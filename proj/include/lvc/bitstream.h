#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvc/common.h"

namespace lvc {

// Little-endian byte writer/reader with length-prefixed chunks:
// [u32 payload length][payload]. Readers bound-check every access and throw
// IntegrityError on truncation.
class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void raw(const void* data, size_t n);
  void chunk(const std::vector<uint8_t>& payload);

  const std::vector<uint8_t>& bytes() const { return buf_; }
  std::vector<uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const uint8_t* data, size_t n) : data_(data), n_(n) {}
  explicit ByteReader(const std::vector<uint8_t>& v)
      : ByteReader(v.data(), v.size()) {}

  uint8_t u8();
  uint16_t u16();
  uint32_t u32();
  uint64_t u64();
  std::vector<uint8_t> chunk();
  void raw(void* dst, size_t n);
  size_t remaining() const { return n_ - pos_; }
  bool at_end() const { return pos_ == n_; }

 private:
  const uint8_t* need(size_t n);

  const uint8_t* data_;
  size_t n_;
  size_t pos_ = 0;
};

// Container header. Field order is the serialization order; the weight hash
// binds a stream to the exact model that produced it.
struct ContainerHeader {
  static constexpr char kMagic[4] = {'L', 'V', 'C', 'M'};
  static constexpr uint8_t kVersion = 1;

  uint8_t version = kVersion;
  uint8_t framework = 0;  // 0=RC 1=CC 2=CRC 3=MCR
  uint8_t strategy = 0;   // 0=explicit 1=implicit 2=hybrid
  uint16_t implicit_channels = 0;
  uint8_t lambda_index = 0;
  uint16_t width = 0;
  uint16_t height = 0;
  uint16_t frame_count = 0;
  uint16_t intra_period = 0;
  uint64_t weight_hash = 0;

  void write(ByteWriter& w) const;
  static ContainerHeader read(ByteReader& r);
};

void write_file(const std::string& path, const std::vector<uint8_t>& bytes);
std::vector<uint8_t> read_file(const std::string& path);

}  // namespace lvc
