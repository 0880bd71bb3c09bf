#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "stratexp/model.hpp"

namespace stratexp {

// Parameter files come in two equivalent flavours: flat `name = value`
// lines (blank lines and `#` comments allowed) or a single JSON object.
// Keys are exactly r, s, sigma, alpha0, alpha1, h, lambda0, lambda1, N;
// every key is required, unknown or repeated keys are rejected, and the
// result goes through validate().

ModelParams parse_params_kv(std::string_view text);
ModelParams parse_params_json(std::string_view text);

/// Picks JSON when the first non-blank character is '{', key-value otherwise.
ModelParams parse_params(std::string_view text);

ModelParams load_params(const std::filesystem::path& path);

std::string to_kv(const ModelParams& params);
std::string to_json(const ModelParams& params);

}  // namespace stratexp
