#pragma once

#include "hombif/linalg.hpp"
#include "hombif/system.hpp"

#include <string_view>
#include <vector>

namespace hombif::example {

enum class GammaKind { linear, abs, sin, tan };

std::string_view to_string(GammaKind kind);
GammaKind parse_gamma_kind(std::string_view name);

/// Planar system x1' = -sgn(t) x1, x2' = gamma(lambda) x1 + sgn(t) x2 + beta x1^n.
struct ExampleConfig {
  double beta = 1.0;
  int n = 2;
  GammaKind kind = GammaKind::linear;

  /// Throws Error(invalid_argument) unless beta != 0 and n >= 2.
  void validate() const;
  Interval param_interval() const;
  double gamma(double lambda) const;
};

SystemSpec example_system(const ExampleConfig& cfg);

/// Solution through x(0) = xi of the planar system with constant gamma.
Vec closed_form_solution(const ExampleConfig& cfg, double lambda, const Vec& xi, double t);

/// Same, for an explicit coefficient value.
Vec closed_form_solution_gamma(double beta, int n, double gamma, const Vec& xi, double t);

/// All real xi1 (with xi2 = 0) giving a solution homoclinic to 0, ascending.
std::vector<double> homoclinic_initial_conditions(const ExampleConfig& cfg, double lambda);

/// E(lambda) = -4 gamma(lambda) for the unnormalized bases (-2, gamma), (2, gamma).
double oracle_evans(const ExampleConfig& cfg, double lambda);

/// Max |d/dt phi - f(t, phi)| of the closed form over a sample set of
/// (t, xi, gamma), with the time derivative taken by complex step h.
double closed_form_max_residual(double beta, int n, double h = 1e-20);

}  // namespace hombif::example
