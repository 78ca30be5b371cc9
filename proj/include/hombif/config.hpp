#pragma once

#include "hombif/example.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hombif::cli {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, std::string key)
      : std::runtime_error(what), line_(line), key_(std::move(key)) {}
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct BranchConfig {
  /// Branch switching at this critical value (refined from the scan when the
  /// closest certified sign change is within 0.1).
  std::optional<double> seed_lambda;
  /// Or start on a known solution: lambda plus guess amplitude xi1 at t = 0.
  std::optional<double> start_lambda;
  std::optional<double> start_xi1;
  double epsilon = 1e-2;
  double ds = 0.05;
  double ds_max = 1.0;
  int max_steps = 2000;
  std::optional<std::pair<double, double>> window;
};

struct RunConfig {
  std::string system = "example-linear";
  example::ExampleConfig example;
  double lambda_min = -2.0;
  double lambda_max = 2.0;
  double grid_step = 0.05;
  double horizon = 20.0;      ///< dichotomy horizon
  double bvp_horizon = 20.0;  ///< truncation of the homoclinic BVP
  double mesh_step = 0.01;
  double integration_tol = 1e-10;
  double zero_tol = 1e-8;
  double refine_tol = 1e-6;
  double newton_tol = 1e-9;
  double cluster_tol = 1e-5;
  double gap_threshold = 1e2;
  double triviality_floor = 1e-6;
  double norm_cap = 1e6;
  std::string output = "out";
  std::uint64_t seed = 0;

  std::vector<std::pair<double, double>> parity_pairs;
  std::vector<double> dichotomy_samples;
  BranchConfig branch;
  std::vector<std::string> continua;  ///< continuum.json files for classify
};

/// Parses a YAML document. Unknown keys are errors.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

/// Throws ValidationError listing every violated invariant.
void validate(const RunConfig& cfg);

}  // namespace hombif::cli
