#include "lvc/dataset.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "lvc/common.h"
#include "lvc/evaluation.h"
#include "lvc/rng.h"

namespace fs = std::filesystem;

namespace lvc {

std::vector<Tensor> make_synthetic_clip(const SyntheticSpec& spec) {
  LVC_CHECK(spec.frames >= 1 && spec.height > 0 && spec.width > 0,
            "bad synthetic spec");
  Rng rng(spec.seed);

  struct Grating {
    double amp, fx, fy, phase;
  };
  constexpr int kGratings = 5;
  Grating g[3][kGratings];
  for (int c = 0; c < 3; ++c) {
    double amp_budget = 0.42;
    for (int k = 0; k < kGratings; ++k) {
      const double amp = amp_budget * (k + 1 == kGratings
                                           ? 1.0
                                           : rng.uniform(0.2, 0.5));
      amp_budget -= amp;
      const double freq = rng.uniform(1.0 / 48.0, 1.0 / 10.0);
      const double ang = rng.uniform(0.0, 6.283185307179586);
      g[c][k] = {amp, freq * std::cos(ang), freq * std::sin(ang),
                 rng.uniform(0.0, 6.283185307179586)};
    }
  }
  const double dx = rng.uniform(-spec.max_shift, spec.max_shift);
  const double dy = rng.uniform(-spec.max_shift, spec.max_shift);
  const double cx = 0.5 * (spec.width - 1);
  const double cy = 0.5 * (spec.height - 1);
  const uint64_t noise_seed = rng.next_u64();

  std::vector<Tensor> clip;
  clip.reserve(spec.frames);
  for (int t = 0; t < spec.frames; ++t) {
    Tensor frame(3, spec.height, spec.width);
    Rng noise(noise_seed + uint64_t(t) * 0x9e3779b97f4a7c15ull);
    const double theta = -spec.rot_speed * t;
    const double ct = std::cos(theta), st = std::sin(theta);
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        // Inverse motion: undo translation, then rotation about center.
        const double xs = x - t * dx - cx;
        const double ys = y - t * dy - cy;
        const double u = ct * xs - st * ys + cx;
        const double v = st * xs + ct * ys + cy;
        for (int c = 0; c < 3; ++c) {
          double val = 0.5;
          for (int k = 0; k < kGratings; ++k)
            val += g[c][k].amp *
                   std::sin(6.283185307179586 *
                                (g[c][k].fx * u + g[c][k].fy * v) +
                            g[c][k].phase);
          val += spec.noise_sigma * noise.normal();
          frame.at(c, y, x) = float(std::clamp(val, 0.0, 1.0));
        }
      }
    clip.push_back(std::move(frame));
  }
  return clip;
}

std::vector<Tensor> make_synthetic_clip(uint64_t seed, int frames, int height,
                                        int width) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.frames = frames;
  spec.height = height;
  spec.width = width;
  return make_synthetic_clip(spec);
}

void write_ppm(const std::string& path, const Tensor& rgb) {
  LVC_CHECK(rgb.shape.c == 3, "ppm writer expects RGB");
  std::ofstream f(path, std::ios::binary);
  LVC_CHECK(f.good(), "cannot open ", path, " for writing");
  f << "P6\n" << rgb.shape.w << " " << rgb.shape.h << "\n255\n";
  std::vector<uint8_t> row(size_t(rgb.shape.w) * 3);
  for (int y = 0; y < rgb.shape.h; ++y) {
    for (int x = 0; x < rgb.shape.w; ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(rgb.at(c, y, x), 0.0f, 1.0f);
        row[size_t(x) * 3 + c] = uint8_t(std::lround(v * 255.0f));
      }
    f.write(reinterpret_cast<const char*>(row.data()),
            std::streamsize(row.size()));
  }
  LVC_CHECK(f.good(), "write failed for ", path);
}

Tensor read_ppm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  LVC_CHECK(f.good(), "cannot open ", path);
  std::string magic;
  f >> magic;
  LVC_CHECK(magic == "P6", path, " is not a binary ppm");
  int w = 0, h = 0, maxval = 0;
  f >> w >> h >> maxval;
  LVC_CHECK(w > 0 && h > 0 && maxval == 255, "unsupported ppm header in ",
            path);
  f.get();  // single whitespace after maxval
  Tensor rgb(3, h, w);
  std::vector<uint8_t> row(size_t(w) * 3);
  for (int y = 0; y < h; ++y) {
    f.read(reinterpret_cast<char*>(row.data()), std::streamsize(row.size()));
    LVC_CHECK(f.good(), "truncated ppm ", path);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        rgb.at(c, y, x) = float(row[size_t(x) * 3 + c]) / 255.0f;
  }
  return rgb;
}

namespace {

class YuvFileSource : public FrameSource {
 public:
  YuvFileSource(const std::string& path, int width, int height)
      : path_(path), width_(width), height_(height) {
    LVC_CHECK(width > 0 && height > 0 && width % 2 == 0 && height % 2 == 0,
              "yuv dimensions must be positive and even");
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    LVC_CHECK(f.good(), "cannot open ", path);
    const int64_t size = f.tellg();
    LVC_CHECK(size % frame_bytes() == 0, path, " size ", size,
              " is not a multiple of the frame size ", frame_bytes());
    count_ = int(size / frame_bytes());
  }

  int count() const override { return count_; }

  Tensor get(int index) override {
    LVC_CHECK(index >= 0 && index < count_, "frame index out of range");
    std::ifstream f(path_, std::ios::binary);
    LVC_CHECK(f.good(), "cannot open ", path_);
    f.seekg(int64_t(index) * frame_bytes());
    const size_t ysz = size_t(width_) * height_;
    const size_t csz = size_t(width_ / 2) * (height_ / 2);
    std::vector<uint8_t> y(ysz), u(csz), v(csz);
    f.read(reinterpret_cast<char*>(y.data()), std::streamsize(ysz));
    f.read(reinterpret_cast<char*>(u.data()), std::streamsize(csz));
    f.read(reinterpret_cast<char*>(v.data()), std::streamsize(csz));
    LVC_CHECK(f.good(), "truncated yuv frame in ", path_);
    return yuv420_to_rgb(y, u, v, width_, height_);
  }

 private:
  int64_t frame_bytes() const {
    return int64_t(width_) * height_ * 3 / 2;
  }

  std::string path_;
  int width_, height_;
  int count_ = 0;
};

class PpmDirSource : public FrameSource {
 public:
  explicit PpmDirSource(const std::string& dir) {
    LVC_CHECK(fs::is_directory(dir), dir, " is not a directory");
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".ppm") paths_.push_back(e.path().string());
    std::sort(paths_.begin(), paths_.end());
    LVC_CHECK(!paths_.empty(), "no .ppm frames in ", dir);
  }

  int count() const override { return int(paths_.size()); }
  Tensor get(int index) override {
    LVC_CHECK(index >= 0 && index < count(), "frame index out of range");
    return read_ppm(paths_[size_t(index)]);
  }

 private:
  std::vector<std::string> paths_;
};

}  // namespace

std::unique_ptr<FrameSource> open_yuv_sequence(const std::string& path,
                                               int width, int height) {
  return std::make_unique<YuvFileSource>(path, width, height);
}

std::unique_ptr<FrameSource> open_yuv_sequence(const std::string& path) {
  const std::string sidecar = path + ".json";
  std::ifstream f(sidecar);
  LVC_CHECK(f.good(), "missing sidecar ", sidecar);
  int width = 0, height = 0;
  try {
    nlohmann::json j;
    f >> j;
    width = j.at("width").get<int>();
    height = j.at("height").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(detail::format_msg("bad sidecar ", sidecar, ": ",
                                       e.what()));
  }
  return open_yuv_sequence(path, width, height);
}

std::unique_ptr<FrameSource> open_ppm_directory(const std::string& dir) {
  return std::make_unique<PpmDirSource>(dir);
}

std::unique_ptr<FrameSource> open_sequence(const std::string& path) {
  if (fs::is_directory(path)) return open_ppm_directory(path);
  if (path.size() > 4 && path.substr(path.size() - 4) == ".yuv")
    return open_yuv_sequence(path);
  throw DataError("cannot open sequence " + path +
                  ": expected a .yuv file or a directory of .ppm frames");
}

std::vector<Tensor> load_frames(FrameSource& src, int max_frames) {
  const int n = max_frames > 0 ? std::min(max_frames, src.count())
                               : src.count();
  std::vector<Tensor> frames;
  frames.reserve(size_t(n));
  for (int i = 0; i < n; ++i) frames.push_back(src.get(i));
  return frames;
}

void write_yuv_sequence(const std::string& path,
                        const std::vector<Tensor>& rgb_frames) {
  LVC_CHECK(!rgb_frames.empty(), "no frames to write");
  const Shape s = rgb_frames[0].shape;
  LVC_CHECK(s.c == 3 && s.h % 2 == 0 && s.w % 2 == 0,
            "yuv writer needs even RGB frames");
  std::ofstream f(path, std::ios::binary);
  LVC_CHECK(f.good(), "cannot open ", path, " for writing");

  const auto to_byte = [](double v, double lo, double hi) {
    return uint8_t(std::lround(std::clamp(v, lo, hi)));
  };
  std::vector<uint8_t> y(size_t(s.h) * s.w);
  std::vector<uint8_t> u(size_t(s.h / 2) * (s.w / 2));
  std::vector<uint8_t> v(u.size());
  for (const auto& frame : rgb_frames) {
    LVC_CHECK(frame.shape == s, "frame size mismatch");
    for (int yy = 0; yy < s.h; ++yy)
      for (int xx = 0; xx < s.w; ++xx) {
        const double r = frame.at(0, yy, xx);
        const double g = frame.at(1, yy, xx);
        const double b = frame.at(2, yy, xx);
        const double luma = 0.2126 * r + 0.7152 * g + 0.0722 * b;
        y[size_t(yy) * s.w + xx] = to_byte(16.0 + 219.0 * luma, 16.0, 235.0);
        // Chroma co-sited with the top-left pixel of each 2x2 block.
        if (yy % 2 == 0 && xx % 2 == 0) {
          const size_t ci = size_t(yy / 2) * (s.w / 2) + xx / 2;
          u[ci] = to_byte(128.0 + 224.0 * (b - luma) / 1.8556, 16.0, 240.0);
          v[ci] = to_byte(128.0 + 224.0 * (r - luma) / 1.5748, 16.0, 240.0);
        }
      }
    f.write(reinterpret_cast<const char*>(y.data()), std::streamsize(y.size()));
    f.write(reinterpret_cast<const char*>(u.data()), std::streamsize(u.size()));
    f.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size()));
  }
  LVC_CHECK(f.good(), "write failed for ", path);

  nlohmann::json j;
  j["width"] = s.w;
  j["height"] = s.h;
  std::ofstream sidecar(path + ".json");
  LVC_CHECK(sidecar.good(), "cannot write sidecar for ", path);
  sidecar << j.dump(2) << "\n";
}

}  // namespace lvc
