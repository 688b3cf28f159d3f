#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lvc/tensor.h"

namespace lvc {

// Synthetic clip: per-channel sums of sinusoidal gratings undergoing global
// subpixel translation plus a slow rotation about the center, with a little
// seeded noise. Values lie in (0,1); the motion is known exactly, which the
// flow tests lean on.
struct SyntheticSpec {
  uint64_t seed = 1;
  int frames = 5;
  int height = 64;
  int width = 64;
  double max_shift = 1.5;   // per-frame translation magnitude bound, pixels
  double rot_speed = 0.004; // radians per frame
  double noise_sigma = 0.01;
};

std::vector<Tensor> make_synthetic_clip(const SyntheticSpec& spec);
std::vector<Tensor> make_synthetic_clip(uint64_t seed, int frames, int height,
                                        int width);

// Binary PPM (P6, maxval 255) round trip for RGB frames in [0,1].
void write_ppm(const std::string& path, const Tensor& rgb);
Tensor read_ppm(const std::string& path);

// Abstract frame access for coding and evaluation.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual int count() const = 0;
  virtual Tensor get(int index) = 0;
};

// Planar YUV420 file with a JSON sidecar ("<path>.json" holding width and
// height). Frames convert to RGB on read.
std::unique_ptr<FrameSource> open_yuv_sequence(const std::string& path);
std::unique_ptr<FrameSource> open_yuv_sequence(const std::string& path,
                                               int width, int height);
// Directory of numbered .ppm frames in lexicographic order.
std::unique_ptr<FrameSource> open_ppm_directory(const std::string& dir);
// Dispatch on path: .yuv file or directory of .ppm frames.
std::unique_ptr<FrameSource> open_sequence(const std::string& path);

std::vector<Tensor> load_frames(FrameSource& src, int max_frames);

// Writes a synthetic clip as YUV420 with sidecar (for gen-data).
void write_yuv_sequence(const std::string& path,
                        const std::vector<Tensor>& rgb_frames);

}  // namespace lvc
