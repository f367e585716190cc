#pragma once

#include <filesystem>
#include <string>

#include "mnn/models.hpp"

namespace mnn::io {

/// Self-describing JSON document: model kind, positivity map, network spec
/// and layer-ordered parameter arrays, per-event knot grids and, for PH
/// models, the baseline jumps. Loading rebuilds derived caches, so a saved
/// model predicts bit-identically after a round trip.
std::string model_to_json(const MnnModel& model);
MnnModel model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const MnnModel& model);
MnnModel load_model(const std::filesystem::path& path);

}  // namespace mnn::io
