#pragma once

#include "hombif/linalg.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace hombif {

/// Open interval (lo, hi); infinite ends are allowed.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return lo < x && x < hi; }
  bool contains_closed(double x) const { return lo <= x && x <= hi; }
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

/// State domain Ω with a distance-to-boundary estimate.
struct StateDomain {
  std::function<bool(const Vec&)> contains;
  std::function<double(const Vec&)> distance_to_boundary;

  static StateDomain whole_space();
};

using RhsFn = std::function<Vec(double t, const Vec& x, double lambda)>;
using JacobianFn = std::function<Mat(double t, const Vec& x, double lambda)>;
using BranchFn = std::function<Vec(double t, double lambda)>;

/// Parametrized Caratheodory system x' = f(t, x, lambda), piecewise continuous
/// in t with finitely many declared switching times. Immutable after
/// construction; all callables must be pure so the spec can be shared across
/// threads.
class SystemSpec {
 public:
  SystemSpec(int dim, RhsFn rhs, JacobianFn jacobian,
             std::vector<double> switching_times = {}, BranchFn branch = {},
             Interval param_interval = {},
             StateDomain domain = StateDomain::whole_space(),
             bool admissible = false);

  int dim() const { return dim_; }
  Vec rhs(double t, const Vec& x, double lambda) const { return rhs_(t, x, lambda); }
  Mat jacobian(double t, const Vec& x, double lambda) const {
    return jacobian_(t, x, lambda);
  }
  /// Prescribed branch phi_lambda(t); the zero function unless one was given.
  Vec branch(double t, double lambda) const;
  const std::vector<double>& switching_times() const { return switching_times_; }
  const Interval& param_interval() const { return param_interval_; }
  const StateDomain& domain() const { return domain_; }
  /// User-declared admissibility of the limit sets. Never verified.
  bool admissible() const { return admissible_; }

  /// Switching times strictly inside (a, b), sorted in the direction a -> b.
  std::vector<double> switching_times_between(double a, double b) const;

 private:
  int dim_;
  RhsFn rhs_;
  JacobianFn jacobian_;
  std::vector<double> switching_times_;
  BranchFn branch_;
  Interval param_interval_;
  StateDomain domain_;
  bool admissible_;
};

/// Largest relative deviation between the jacobian and central differences
/// of the rhs, over `samples` random (t, x, lambda) draws from the given boxes.
/// Times closer than `step` to a switching time are skipped.
double jacobian_consistency(const SystemSpec& sys, Interval t_box, double x_radius,
                            Interval lambda_box, int samples, std::uint64_t seed,
                            double step = 1e-5);

/// Max over the grid of |phi'(t) - f(t, phi(t), lambda)| with phi' by central
/// differences. Grid points within `step` of a switching time are skipped.
double branch_residual(const SystemSpec& sys, double lambda,
                       const std::vector<double>& grid, double step = 1e-6);

}  // namespace hombif
