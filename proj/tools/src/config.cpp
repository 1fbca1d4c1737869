#include "config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace ionpf::cli {

namespace {

std::string where(const YAML::Node& node, const std::string& field) {
  const auto m = node.Mark();
  return "line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ": field '" + field + "'";
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw InputError(where(node, field) + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw InputError(where(node, field) + " has an invalid value '" + node.Scalar() + "'");
  }
}

std::size_t count(const YAML::Node& node, const std::string& field) {
  const auto v = scalar<long long>(node, field);
  if (v < 0) throw InputError(where(node, field) + " must be non-negative");
  return static_cast<std::size_t>(v);
}

template <class T, class Fn>
std::vector<T> list(const YAML::Node& node, const std::string& field, Fn&& item) {
  if (!node.IsSequence()) throw InputError(where(node, field) + " must be a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(item(node[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const YAML::Node& node, const std::string& field) {
  const auto v = list<double>(node, field, [](const YAML::Node& n, const std::string& f) { return scalar<double>(n, f); });
  if (v.size() != N) throw InputError(where(node, field) + " must have " + std::to_string(N) + " entries");
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

std::vector<std::size_t> sizes(const YAML::Node& node, const std::string& field) {
  return list<std::size_t>(node, field, [](const YAML::Node& n, const std::string& f) { return count(n, f); });
}

using Handlers = std::map<std::string, std::function<void(const YAML::Node&, const std::string&)>>;

void walk(const YAML::Node& map, const std::string& prefix, const Handlers& handlers) {
  if (map.IsNull()) return;
  if (!map.IsMap()) throw InputError(where(map, prefix.empty() ? "<root>" : prefix) + " must be a mapping");
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    const std::string field = prefix.empty() ? key : prefix + "." + key;
    const auto it = handlers.find(key);
    if (it == handlers.end()) throw InputError(where(kv.first, field) + " is not a known setting");
    it->second(kv.second, field);
  }
}

template <class E, class Fn>
E enumerated(const YAML::Node& node, const std::string& field, Fn&& parse) {
  const auto s = scalar<std::string>(node, field);
  try {
    return parse(s);
  } catch (const std::invalid_argument& e) {
    throw InputError(where(node, field) + ": " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw InputError("config: line " + std::to_string(e.mark.line + 1) + ", column " +
                     std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  ExperimentConfig c;
  auto& m = c.model;
  auto& f = c.filter;
  auto& p = c.policy;
  auto& t = c.trainer;
  auto& e = c.eval;
  auto& b = c.bench;

  const Handlers model{
      {"dt", [&](auto& n, auto& k) { m.dt = scalar<double>(n, k); }},
      {"horizon", [&](auto& n, auto& k) { m.horizon = count(n, k); }},
      {"diffusion", [&](auto& n, auto& k) { m.diffusion = scalar<double>(n, k); }},
      {"x0", [&](auto& n, auto& k) { m.x0 = vec<2>(n, k); }},
      {"prior_mean", [&](auto& n, auto& k) { m.prior.mean = vec<3>(n, k); }},
      {"prior_var", [&](auto& n, auto& k) { m.prior.cov = vec<3>(n, k).asDiagonal(); }},
  };
  const Handlers filter{
      {"N", [&](auto& n, auto& k) { f.N = count(n, k); }},
      {"M", [&](auto& n, auto& k) { f.M = count(n, k); }},
      {"eta", [&](auto& n, auto& k) { f.eta = scalar<double>(n, k); }},
      {"slew_penalty", [&](auto& n, auto& k) { f.slew_penalty = scalar<double>(n, k); }},
      {"strategy", [&](auto& n, auto& k) { f.strategy = enumerated<ThetaStrategy>(n, k, theta_strategy_from_string); }},
      {"jitter_factor", [&](auto& n, auto& k) { f.jitter_factor = scalar<double>(n, k); }},
      {"ibis_moves", [&](auto& n, auto& k) { f.ibis.moves = count(n, k); }},
      {"ibis_ridge", [&](auto& n, auto& k) { f.ibis.ridge = scalar<double>(n, k); }},
  };
  const Handlers policy{
      {"kind", [&](auto& n, auto& k) { p.kind = enumerated<PolicyKind>(n, k, policy_kind_from_string); }},
      {"encoder_widths", [&](auto& n, auto& k) { p.encoder_widths = sizes(n, k); }},
      {"embedding_width", [&](auto& n, auto& k) { p.embedding_width = count(n, k); }},
      {"recurrent_widths", [&](auto& n, auto& k) { p.recurrent_widths = sizes(n, k); }},
      {"head_widths", [&](auto& n, auto& k) { p.head_widths = sizes(n, k); }},
      {"init_log_std", [&](auto& n, auto& k) { p.init_log_std = scalar<double>(n, k); }},
  };
  const Handlers trainer{
      {"iterations", [&](auto& n, auto& k) { t.iterations = count(n, k); }},
      {"learning_rate", [&](auto& n, auto& k) { t.learning_rate = scalar<double>(n, k); }},
      {"decay", [&](auto& n, auto& k) { t.decay = scalar<bool>(n, k); }},
      {"rao_blackwell", [&](auto& n, auto& k) { t.rao_blackwell = scalar<bool>(n, k); }},
      {"smoothing", [&](auto& n, auto& k) { t.smoothing = enumerated<Smoothing>(n, k, smoothing_from_string); }},
      {"optimizer", [&](auto& n, auto& k) { t.optimizer = enumerated<Optimizer>(n, k, optimizer_from_string); }},
  };
  const Handlers eval{
      {"rollouts", [&](auto& n, auto& k) { e.rollouts = count(n, k); }},
      {"M", [&](auto& n, auto& k) { e.M = count(n, k); }},
      {"contrastive", [&](auto& n, auto& k) { e.contrastive = count(n, k); }},
      {"spce_rollouts", [&](auto& n, auto& k) { e.spce_rollouts = count(n, k); }},
      {"replications", [&](auto& n, auto& k) { e.replications = count(n, k); }},
  };
  const Handlers bench{
      {"horizons", [&](auto& n, auto& k) { b.horizons = sizes(n, k); }},
      {"algorithms",
       [&](auto& n, auto& k) {
         b.algorithms = list<std::string>(n, k, [](const YAML::Node& x, const std::string& fk) {
           const auto s = scalar<std::string>(x, fk);
           try {
             (void)algorithm_settings(s, RunConfig{});
           } catch (const std::invalid_argument& err) {
             throw InputError(where(x, fk) + ": " + err.what());
           }
           return s;
         });
       }},
      {"N", [&](auto& n, auto& k) { b.N = count(n, k); }},
      {"M", [&](auto& n, auto& k) { b.M = count(n, k); }},
      {"repeats", [&](auto& n, auto& k) { b.repeats = count(n, k); }},
      {"policy", [&](auto& n, auto& k) { b.arch.kind = enumerated<PolicyKind>(n, k, policy_kind_from_string); }},
  };
  const Handlers top{
      {"seed", [&](auto& n, auto& k) { c.seed = scalar<std::uint64_t>(n, k); }},
      {"output", [&](auto& n, auto& k) { c.output = scalar<std::string>(n, k); }},
      {"model", [&](auto& n, auto& k) { walk(n, k, model); }},
      {"filter", [&](auto& n, auto& k) { walk(n, k, filter); }},
      {"policy", [&](auto& n, auto& k) { walk(n, k, policy); }},
      {"trainer", [&](auto& n, auto& k) { walk(n, k, trainer); }},
      {"eval", [&](auto& n, auto& k) { walk(n, k, eval); }},
      {"bench", [&](auto& n, auto& k) { walk(n, k, bench); }},
  };
  walk(root, "", top);

  try {
    m.validate();
    m.prior.validate();
    f.validate();
    p.validate();
    t.validate();
  } catch (const std::exception& err) {
    throw InputError(std::string("config: ") + err.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace ionpf::cli
