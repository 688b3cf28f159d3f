#include "lvc/bitstream.h"

#include <cstring>
#include <fstream>

namespace lvc {

void ByteWriter::u16(uint16_t v) {
  u8(uint8_t(v));
  u8(uint8_t(v >> 8));
}
void ByteWriter::u32(uint32_t v) {
  u16(uint16_t(v));
  u16(uint16_t(v >> 16));
}
void ByteWriter::u64(uint64_t v) {
  u32(uint32_t(v));
  u32(uint32_t(v >> 32));
}
void ByteWriter::raw(const void* data, size_t n) {
  const auto* p = static_cast<const uint8_t*>(data);
  buf_.insert(buf_.end(), p, p + n);
}
void ByteWriter::chunk(const std::vector<uint8_t>& payload) {
  LVC_CHECK(payload.size() <= 0xFFFFFFFFull, "chunk too large");
  u32(uint32_t(payload.size()));
  raw(payload.data(), payload.size());
}

const uint8_t* ByteReader::need(size_t n) {
  LVC_CHECK_INTEGRITY(pos_ + n <= n_, "stream truncated: need ", n,
                      " bytes at offset ", pos_, ", have ", n_ - pos_);
  const uint8_t* p = data_ + pos_;
  pos_ += n;
  return p;
}

uint8_t ByteReader::u8() { return *need(1); }
uint16_t ByteReader::u16() {
  const uint8_t* p = need(2);
  return uint16_t(p[0] | (p[1] << 8));
}
uint32_t ByteReader::u32() {
  const uint8_t* p = need(4);
  return uint32_t(p[0]) | (uint32_t(p[1]) << 8) | (uint32_t(p[2]) << 16) |
         (uint32_t(p[3]) << 24);
}
uint64_t ByteReader::u64() {
  const uint64_t lo = u32();
  return lo | (uint64_t(u32()) << 32);
}
std::vector<uint8_t> ByteReader::chunk() {
  const uint32_t len = u32();
  const uint8_t* p = need(len);
  return std::vector<uint8_t>(p, p + len);
}
void ByteReader::raw(void* dst, size_t n) {
  std::memcpy(dst, need(n), n);
}

void ContainerHeader::write(ByteWriter& w) const {
  w.raw(kMagic, 4);
  w.u8(version);
  w.u8(framework);
  w.u8(strategy);
  w.u16(implicit_channels);
  w.u8(lambda_index);
  w.u16(width);
  w.u16(height);
  w.u16(frame_count);
  w.u16(intra_period);
  w.u64(weight_hash);
}

ContainerHeader ContainerHeader::read(ByteReader& r) {
  ContainerHeader h;
  const uint8_t m0 = r.u8(), m1 = r.u8(), m2 = r.u8(), m3 = r.u8();
  LVC_CHECK_INTEGRITY(m0 == 'L' && m1 == 'V' && m2 == 'C' && m3 == 'M',
                      "bad container magic");
  h.version = r.u8();
  LVC_CHECK_INTEGRITY(h.version == kVersion, "unsupported container version ",
                      int(h.version));
  h.framework = r.u8();
  h.strategy = r.u8();
  h.implicit_channels = r.u16();
  h.lambda_index = r.u8();
  h.width = r.u16();
  h.height = r.u16();
  h.frame_count = r.u16();
  h.intra_period = r.u16();
  h.weight_hash = r.u64();
  LVC_CHECK_INTEGRITY(h.framework <= 3, "bad framework id");
  LVC_CHECK_INTEGRITY(h.strategy <= 2, "bad strategy id");
  LVC_CHECK_INTEGRITY(h.width > 0 && h.height > 0, "bad frame dimensions");
  return h;
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  LVC_CHECK(f.good(), "cannot open ", path, " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()),
          std::streamsize(bytes.size()));
  LVC_CHECK(f.good(), "write failed for ", path);
}

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  LVC_CHECK(f.good(), "cannot open ", path);
  const std::streamsize n = f.tellg();
  f.seekg(0);
  std::vector<uint8_t> bytes(static_cast<size_t>(n));
  f.read(reinterpret_cast<char*>(bytes.data()), n);
  LVC_CHECK(f.good(), "read failed for ", path);
  return bytes;
}

}  // namespace lvc
