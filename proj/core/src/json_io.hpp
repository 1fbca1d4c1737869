#pragma once

#include <nlohmann/json.hpp>

#include "ionpf/policy.hpp"

namespace ionpf::detail {

nlohmann::json arch_to_json(const PolicyArchConfig& arch);
/// Throws std::invalid_argument on missing or mistyped fields.
PolicyArchConfig arch_from_json(const nlohmann::json& j);

}  // namespace ionpf::detail
