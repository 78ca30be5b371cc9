#include "hombif/config.hpp"

#include "hombif/error.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hombif::cli {

namespace {

std::string join_lines(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

int line_of(const YAML::Node& node) { return node.Mark().line + 1; }

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) throw ParseError("key '" + key + "' expects a scalar", line_of(node), key);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError("key '" + key + "' has an invalid value '" + node.Scalar() + "'", line_of(node),
                     key);
  }
}

std::pair<double, double> pair_of(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence() || node.size() != 2) {
    throw ParseError("key '" + key + "' expects a two-element list", line_of(node), key);
  }
  return {scalar<double>(node[0], key), scalar<double>(node[1], key)};
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      throw ParseError("unknown key '" + key + "'" + (where.empty() ? "" : " in " + where),
                       line_of(kv.first), key);
    }
  }
}

BranchConfig parse_branch(const YAML::Node& node) {
  if (!node.IsMap()) throw ParseError("key 'branch' expects a mapping", line_of(node), "branch");
  check_keys(node,
             {"seed_lambda", "start_lambda", "start_xi1", "epsilon", "ds", "ds_max", "max_steps",
              "window"},
             "branch");
  BranchConfig b;
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "seed_lambda") b.seed_lambda = scalar<double>(v, key);
    else if (key == "start_lambda") b.start_lambda = scalar<double>(v, key);
    else if (key == "start_xi1") b.start_xi1 = scalar<double>(v, key);
    else if (key == "epsilon") b.epsilon = scalar<double>(v, key);
    else if (key == "ds") b.ds = scalar<double>(v, key);
    else if (key == "ds_max") b.ds_max = scalar<double>(v, key);
    else if (key == "max_steps") b.max_steps = scalar<int>(v, key);
    else if (key == "window") b.window = pair_of(v, key);
  }
  return b;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error("invalid configuration: " + join_lines(violations)),
      violations_(std::move(violations)) {}

RunConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, "");
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  if (!root.IsMap()) throw ParseError("configuration must be a mapping", line_of(root), "");
  check_keys(root,
             {"system", "beta", "n", "lambda", "grid_step", "horizon", "bvp_horizon", "mesh_step",
              "integration_tol", "zero_tol", "refine_tol", "newton_tol", "cluster_tol",
              "gap_threshold", "triviality_floor", "norm_cap", "output", "seed", "parity",
              "dichotomy_samples", "branch", "continua"},
             "");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "system") {
      cfg.system = scalar<std::string>(v, key);
    } else if (key == "beta") {
      cfg.example.beta = scalar<double>(v, key);
    } else if (key == "n") {
      cfg.example.n = scalar<int>(v, key);
    } else if (key == "lambda") {
      std::tie(cfg.lambda_min, cfg.lambda_max) = pair_of(v, key);
    } else if (key == "grid_step") {
      cfg.grid_step = scalar<double>(v, key);
    } else if (key == "horizon") {
      cfg.horizon = scalar<double>(v, key);
    } else if (key == "bvp_horizon") {
      cfg.bvp_horizon = scalar<double>(v, key);
    } else if (key == "mesh_step") {
      cfg.mesh_step = scalar<double>(v, key);
    } else if (key == "integration_tol") {
      cfg.integration_tol = scalar<double>(v, key);
    } else if (key == "zero_tol") {
      cfg.zero_tol = scalar<double>(v, key);
    } else if (key == "refine_tol") {
      cfg.refine_tol = scalar<double>(v, key);
    } else if (key == "newton_tol") {
      cfg.newton_tol = scalar<double>(v, key);
    } else if (key == "cluster_tol") {
      cfg.cluster_tol = scalar<double>(v, key);
    } else if (key == "gap_threshold") {
      cfg.gap_threshold = scalar<double>(v, key);
    } else if (key == "triviality_floor") {
      cfg.triviality_floor = scalar<double>(v, key);
    } else if (key == "norm_cap") {
      cfg.norm_cap = scalar<double>(v, key);
    } else if (key == "output") {
      cfg.output = scalar<std::string>(v, key);
    } else if (key == "seed") {
      cfg.seed = scalar<std::uint64_t>(v, key);
    } else if (key == "parity") {
      if (!v.IsSequence()) throw ParseError("key 'parity' expects a list of pairs", line_of(v), key);
      for (const auto& p : v) cfg.parity_pairs.push_back(pair_of(p, key));
    } else if (key == "dichotomy_samples") {
      if (!v.IsSequence()) throw ParseError("key 'dichotomy_samples' expects a list", line_of(v), key);
      for (const auto& p : v) cfg.dichotomy_samples.push_back(scalar<double>(p, key));
    } else if (key == "branch") {
      cfg.branch = parse_branch(v);
    } else if (key == "continua") {
      if (!v.IsSequence()) throw ParseError("key 'continua' expects a list of paths", line_of(v), key);
      for (const auto& p : v) cfg.continua.push_back(scalar<std::string>(p, key));
    }
  }
  if (cfg.system.rfind("example-", 0) == 0) {
    try {
      cfg.example.kind = example::parse_gamma_kind(cfg.system.substr(8));
    } catch (const Error&) {
      // reported by validate
    }
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open configuration file '" + path + "'", 0, "");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate(const RunConfig& cfg) {
  std::vector<std::string> bad;
  bool known_system = false;
  if (cfg.system.rfind("example-", 0) == 0) {
    try {
      known_system = example::parse_gamma_kind(cfg.system.substr(8)) == cfg.example.kind;
    } catch (const Error&) {
    }
  }
  if (!known_system) bad.push_back("unknown system '" + cfg.system + "'");
  if (cfg.example.beta == 0.0 || !std::isfinite(cfg.example.beta)) bad.push_back("beta must be finite and nonzero");
  if (cfg.example.n < 2) bad.push_back("n must be at least 2");

  const std::pair<const char*, double> positive[] = {
      {"grid_step", cfg.grid_step},
      {"horizon", cfg.horizon},
      {"bvp_horizon", cfg.bvp_horizon},
      {"mesh_step", cfg.mesh_step},
      {"integration_tol", cfg.integration_tol},
      {"zero_tol", cfg.zero_tol},
      {"refine_tol", cfg.refine_tol},
      {"newton_tol", cfg.newton_tol},
      {"cluster_tol", cfg.cluster_tol},
      {"gap_threshold", cfg.gap_threshold},
      {"triviality_floor", cfg.triviality_floor},
      {"norm_cap", cfg.norm_cap},
      {"branch.epsilon", cfg.branch.epsilon},
      {"branch.ds", cfg.branch.ds},
      {"branch.ds_max", cfg.branch.ds_max},
  };
  for (const auto& [name, value] : positive) {
    if (!(value > 0) || !std::isfinite(value)) bad.push_back(std::string(name) + " must be positive");
  }
  if (cfg.branch.max_steps <= 0) bad.push_back("branch.max_steps must be positive");

  const Interval lam = cfg.example.param_interval();
  auto check_window = [&](const std::string& name, double lo, double hi) {
    if (!(lo < hi)) {
      bad.push_back(name + " must satisfy lo < hi");
    } else if (!lam.contains(lo) || !lam.contains(hi)) {
      std::ostringstream os;
      os << name << " [" << lo << ", " << hi << "] is outside the parameter interval ("
         << lam.lo << ", " << lam.hi << ")";
      bad.push_back(os.str());
    }
  };
  check_window("lambda window", cfg.lambda_min, cfg.lambda_max);
  if (cfg.branch.window) check_window("branch.window", cfg.branch.window->first, cfg.branch.window->second);
  for (const auto& [lo, hi] : cfg.parity_pairs) check_window("parity pair", lo, hi);
  for (double s : cfg.dichotomy_samples) {
    if (!lam.contains(s)) bad.push_back("dichotomy sample " + std::to_string(s) + " is outside the parameter interval");
  }
  if (cfg.branch.seed_lambda && !lam.contains(*cfg.branch.seed_lambda)) {
    bad.push_back("branch.seed_lambda is outside the parameter interval");
  }
  if (cfg.branch.start_lambda.has_value() != cfg.branch.start_xi1.has_value()) {
    bad.push_back("branch.start_lambda and branch.start_xi1 must be given together");
  }
  if (cfg.branch.start_lambda && !lam.contains(*cfg.branch.start_lambda)) {
    bad.push_back("branch.start_lambda is outside the parameter interval");
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
}

}  // namespace hombif::cli
