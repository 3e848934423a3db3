#pragma once

#include "reviewq/bn.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace reviewq {

inline constexpr std::string_view kModelFormatVersion = "v1";

/// JSON model document; see docs/model-format.md. Probabilities are written
/// as shortest round-trip decimal literals, so a reload is bit-exact.
std::string serialize_model(const TrainedModel &model);

/// Throws VersionError for an unknown version and LoadError (with a JSON
/// path to the offending element) for anything malformed or invalid.
TrainedModel deserialize_model(std::string_view document);

/// Write to a sibling temp file, then rename over `path`.
void save_model_file(const TrainedModel &model,
                     const std::filesystem::path &path);
TrainedModel load_model_file(const std::filesystem::path &path);

} // namespace reviewq
