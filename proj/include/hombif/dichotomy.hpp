#pragma once

#include "hombif/linalg.hpp"
#include "hombif/system.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace hombif {

enum class HalfLine { plus, minus };

struct DichotomyConstants {
  double K = 1.0;
  double alpha = 0.0;
  double fit_residual = 0.0;
};

/// Numerical stand-in for R(P+(0)) (plus) or N(P-(0)) (minus).
struct DichotomySubspaces {
  double lambda = 0.0;
  HalfLine halfline = HalfLine::plus;
  Mat basis;                  ///< d x rank, orthonormal columns
  int rank = 0;
  double gap = 1.0;           ///< singular value ratio across the rank cut
  double horizon = 0.0;
  /// Orthonormal basis of the complement of Phi(+-T, 0) span(basis), i.e. the
  /// directions that must vanish at the truncation end (d x (d - rank)).
  Mat far_annihilator;
  std::vector<double> log_singular_values;  ///< descending
  std::optional<DichotomyConstants> constants;
};

struct DichotomyOptions {
  double horizon = 20.0;
  double gap_threshold = 1e2;
  std::optional<int> rank_hint;
  double tol = 1e-10;
  double window = 1.0;
};

/// Initial values at t = 0 decaying forward: right singular subspace of the
/// smallest singular values of Phi(T, 0). Throws Error(no_gap).
DichotomySubspaces stable_subspace_plus(const SystemSpec& sys, double lambda,
                                        const DichotomyOptions& opts = {});

/// Initial values at t = 0 decaying backward, from Phi(-T, 0). Throws
/// Error(no_gap).
DichotomySubspaces unstable_subspace_minus(const SystemSpec& sys, double lambda,
                                           const DichotomyOptions& opts = {});

/// Subspace extraction from an already computed propagator to +-horizon.
DichotomySubspaces subspace_from_propagator(const Mat& core, double log_scale,
                                            const Mat& q, double lambda,
                                            HalfLine halfline,
                                            const DichotomyOptions& opts);

/// Fit of |Phi(t, s) Pi(s)| <= K exp(-alpha |t - s|), Pi(s) the orthogonal
/// projector onto Phi(s, 0) span(basis). For the plus half-line pairs satisfy
/// 0 <= s <= t, for the minus half-line t <= s <= 0. Throws Error(non_decay)
/// if the fitted rate is not positive.
DichotomyConstants estimate_dichotomy_constants(
    const SystemSpec& sys, double lambda, const DichotomySubspaces& sub,
    const std::vector<std::pair<double, double>>& sample_grid, double tol = 1e-10);

/// Default (s, t) sample grid on the half-line of `sub`, |t|, |s| <= span.
std::vector<std::pair<double, double>> default_sample_grid(HalfLine halfline,
                                                          double span = 6.0);

struct IndexReport {
  int plus_rank = 0;
  int minus_rank = 0;
  int dim = 0;
  int index = 0;               ///< r + n - d
  int intersection_dim = 0;    ///< principal angles below the threshold
  double smallest_angle = 0.0;
};

IndexReport fredholm_index_check(const DichotomySubspaces& plus,
                                 const DichotomySubspaces& minus,
                                 double angle_threshold = 1e-6);

}  // namespace hombif
