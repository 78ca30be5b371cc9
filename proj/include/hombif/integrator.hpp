#pragma once

#include "hombif/linalg.hpp"
#include "hombif/system.hpp"

#include <functional>
#include <vector>

namespace hombif {

/// Dense-output trajectory: accepted step nodes with states and one-sided
/// slopes, interpolated by cubic Hermite between nodes. At a switching time
/// the incoming and outgoing slopes differ.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<double> t, std::vector<Vec> x, std::vector<Vec> slope_in,
             std::vector<Vec> slope_out, double tol);

  std::size_t size() const { return t_.size(); }
  const std::vector<double>& times() const { return t_; }
  const std::vector<Vec>& states() const { return x_; }
  double tolerance() const { return tol_; }
  static constexpr int interpolation_order = 3;

  double t_begin() const { return t_.front(); }
  double t_end() const { return t_.back(); }
  const Vec& front() const { return x_.front(); }
  const Vec& back() const { return x_.back(); }

  /// State at time t, which must lie within the covered range.
  Vec operator()(double t) const;

 private:
  std::vector<double> t_;
  std::vector<Vec> x_;
  std::vector<Vec> in_;
  std::vector<Vec> out_;
  double tol_ = 0.0;
};

/// Vector field evaluated on an open segment. The integrator never calls it
/// exactly at a segment end: stage times on a breakpoint are nudged one ulp
/// into the segment, so piecewise-continuous fields see their one-sided limit.
using Field = std::function<Vec(double t, const Vec& x)>;

struct IntegratorOptions {
  double tol = 1e-10;
  double initial_step = 0.0;  ///< 0 picks a step from the field scale
  double max_step = 0.0;      ///< 0 means unbounded
  long max_steps = 1'000'000;
  /// Called on each accepted state; returning false stops with DomainExit.
  std::function<bool(const Vec&)> inside;
};

/// Dormand-Prince 5(4) integration from t0 to t1 (either direction),
/// segmented at `breakpoints`. Local error per step is kept below
/// tol * (1 + |x|) componentwise.
Trajectory integrate_field(const Field& field, const std::vector<double>& breakpoints,
                           double t0, const Vec& x0, double t1,
                           const IntegratorOptions& opts);

/// Solution of x' = f(t, x, lambda), x(t0) = x0 on [t0, t1]. Throws
/// Error(domain_exit) with the exit time if the trajectory leaves the state
/// domain, Error(step_failure) if the step size underflows.
Trajectory integrate_ivp(const SystemSpec& sys, double lambda, double t0,
                         const Vec& x0, double t1, double tol);

}  // namespace hombif
