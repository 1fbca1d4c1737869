#include "ionpf/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_io.hpp"

namespace ionpf {

namespace detail {

nlohmann::json arch_to_json(const PolicyArchConfig& arch) {
  return {{"kind", to_string(arch.kind)},
          {"encoder_widths", arch.encoder_widths},
          {"embedding_width", arch.embedding_width},
          {"recurrent_widths", arch.recurrent_widths},
          {"head_widths", arch.head_widths},
          {"design_dim", arch.design_dim},
          {"init_log_std", arch.init_log_std}};
}

PolicyArchConfig arch_from_json(const nlohmann::json& j) {
  try {
    PolicyArchConfig arch;
    arch.kind = policy_kind_from_string(j.at("kind").get<std::string>());
    arch.encoder_widths = j.at("encoder_widths").get<std::vector<std::size_t>>();
    arch.embedding_width = j.at("embedding_width").get<std::size_t>();
    arch.recurrent_widths = j.at("recurrent_widths").get<std::vector<std::size_t>>();
    arch.head_widths = j.at("head_widths").get<std::vector<std::size_t>>();
    arch.design_dim = j.at("design_dim").get<std::size_t>();
    arch.init_log_std = j.at("init_log_std").get<double>();
    arch.validate();
    return arch;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("policy architecture: ") + e.what());
  }
}

}  // namespace detail

namespace {
constexpr const char* kFormat = "ionpf-policy";
}

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  const auto policy = make_policy(ckpt.arch);
  if (static_cast<std::size_t>(ckpt.params.size()) != policy->num_params())
    throw CheckpointError("checkpoint: parameter count does not match the architecture");
  if (!ckpt.params.allFinite()) throw CheckpointError("checkpoint: parameters must be finite");
  nlohmann::json j;
  j["format"] = kFormat;
  j["version"] = kCheckpointVersion;
  j["arch"] = detail::arch_to_json(ckpt.arch);
  j["params"] = std::vector<double>(ckpt.params.data(), ckpt.params.data() + ckpt.params.size());
  return j.dump() + "\n";
}

Checkpoint checkpoint_from_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) throw CheckpointError("checkpoint: unexpected format tag");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
    Checkpoint ckpt;
    ckpt.arch = detail::arch_from_json(j.at("arch"));
    const auto params = j.at("params").get<std::vector<double>>();
    ckpt.params = Eigen::Map<const Eigen::VectorXd>(params.data(), static_cast<Eigen::Index>(params.size()));
    if (params.size() != make_policy(ckpt.arch)->num_params())
      throw CheckpointError("checkpoint: parameter count does not match the architecture");
    if (!ckpt.params.allFinite()) throw CheckpointError("checkpoint: non-finite parameter");
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string text = checkpoint_to_string(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("checkpoint: cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw CheckpointError("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace ionpf
