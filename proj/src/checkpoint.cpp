#include "lvc/checkpoint.h"

#include <cstring>
#include <map>

#include "lvc/bitstream.h"

namespace lvc {

namespace {
constexpr char kMagic[8] = {'L', 'V', 'C', 'W', 'G', 'T', 'S', '1'};
}

void save_checkpoint(const std::string& path, const VideoModel& model) {
  ByteWriter w;
  w.raw(kMagic, 8);
  const std::string cfg = model.config().to_json();
  std::vector<uint8_t> cfg_bytes(cfg.begin(), cfg.end());
  w.chunk(cfg_bytes);
  const auto& items = model.params().items();
  w.u32(uint32_t(items.size()));
  for (const auto& [name, p] : items) {
    LVC_CHECK(name.size() <= 0xFFFF, "parameter name too long");
    w.u16(uint16_t(name.size()));
    w.raw(name.data(), name.size());
    w.u32(uint32_t(p->val.shape.c));
    w.u32(uint32_t(p->val.shape.h));
    w.u32(uint32_t(p->val.shape.w));
    w.raw(p->val.v.data(), p->val.v.size() * sizeof(float));
  }
  w.u64(model.params().weight_hash());
  write_file(path, w.bytes());
}

std::unique_ptr<VideoModel> load_checkpoint(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file(path);
  ByteReader r(bytes);
  for (char c : kMagic)
    LVC_CHECK_INTEGRITY(r.u8() == uint8_t(c), "not a weight file: ", path);
  const std::vector<uint8_t> cfg_bytes = r.chunk();
  const ModelConfig cfg = ModelConfig::from_json(
      std::string(cfg_bytes.begin(), cfg_bytes.end()));
  auto model = std::make_unique<VideoModel>(cfg, /*seed=*/0);

  const uint32_t count = r.u32();
  std::map<std::string, Tensor> named;
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t name_len = r.u16();
    std::string name(name_len, '\0');
    for (auto& ch : name) ch = char(r.u8());
    Shape s;
    s.c = int(r.u32());
    s.h = int(r.u32());
    s.w = int(r.u32());
    LVC_CHECK_INTEGRITY(s.c > 0 && s.h > 0 && s.w > 0 &&
                            s.numel() < (int64_t(1) << 28),
                        "implausible parameter shape in ", path);
    Tensor t(s);
    const size_t nbytes = t.v.size() * sizeof(float);
    LVC_CHECK_INTEGRITY(r.remaining() >= nbytes, "weight file truncated");
    r.raw(t.v.data(), nbytes);
    named.emplace(std::move(name), std::move(t));
  }
  model->params().load(named);
  const uint64_t stored_hash = r.u64();
  LVC_CHECK_INTEGRITY(r.at_end(), "trailing bytes in weight file");
  LVC_CHECK_INTEGRITY(model->params().weight_hash() == stored_hash,
                      "weight hash mismatch in ", path);
  return model;
}

}  // namespace lvc
