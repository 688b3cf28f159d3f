#pragma once

#include <memory>
#include <string>

#include "lvc/model.h"

namespace lvc {

// Weight file: magic, version, a JSON model-config block, then raw float32
// parameter blobs in registration order, closed by the weight hash of the
// stored parameters. Loading reconstructs the model from the stored config
// and verifies the hash.
void save_checkpoint(const std::string& path, const VideoModel& model);
std::unique_ptr<VideoModel> load_checkpoint(const std::string& path);

}  // namespace lvc
