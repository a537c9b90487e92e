#pragma once

#include <string>

#include "aislab/nn/tape.hpp"

namespace aislab::nn {

/// {"manifest": [{"name", "rows", "cols", "offset"}...], "values": [...]}
/// with values flattened column-major in manifest order.
std::string save_checkpoint(const ParamList& params);
/// Loads into `params`, which must match the manifest by name and shape.
void load_checkpoint(const std::string& text, const ParamList& params);

}  // namespace aislab::nn
