#pragma once

#include <string>

#include "beamsem/nn/models.hpp"

namespace beamsem::nn {

/// Writes every parameter plus a few "meta.*" tensors (kind, sizes, seed and
/// candidate pairs) so the file alone is enough to rebuild the model.
void save_model(const BeamModel& model, const std::string& path);

/// Throws DataError on a bad magic, truncated file or a tensor whose shape does
/// not match the architecture described by its meta tensors.
[[nodiscard]] BeamModel load_model(const std::string& path);

}  // namespace beamsem::nn
