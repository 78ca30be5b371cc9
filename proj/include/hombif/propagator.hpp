#pragma once

#include "hombif/linalg.hpp"
#include "hombif/system.hpp"

#include <vector>

namespace hombif {

/// Transition matrix Phi(t, s) = q * r[m-1] * ... * r[0], each factor coming
/// from one renormalization window.
struct FactoredPropagator {
  double s = 0.0;
  double t = 0.0;
  Mat q;
  std::vector<Mat> r;

  /// Raw matrix. Throws Error(overflow) if it is not representable.
  Mat assemble() const;

  /// Product r[m-1] * ... * r[0] as (m, log_scale) with the true product equal
  /// to exp(log_scale) * m and max|m| = 1.
  std::pair<Mat, double> scaled_core() const;
};

/// Variational field X' = D2 f(t, phi_lambda(t), lambda) X of the prescribed branch.
Mat variational_matrix(const SystemSpec& sys, double lambda, double t);

/// Phi_lambda(t, s) in factored form with QR renormalization every `window`
/// time units.
FactoredPropagator factored_transition(const SystemSpec& sys, double lambda, double s,
                                       double t, double tol, double window = 1.0);

/// Phi_lambda(t, s) of the variational equation along the prescribed branch.
Mat transition_matrix(const SystemSpec& sys, double lambda, double s, double t,
                      double tol, double window = 1.0);

/// Values Phi_lambda(t_k, 0) v on a sorted time grid containing 0, integrated
/// outward from 0 in both directions.
std::vector<Vec> propagate_vector(const SystemSpec& sys, double lambda, const Vec& v,
                                  const std::vector<double>& grid, double tol);

}  // namespace hombif
