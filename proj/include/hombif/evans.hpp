#pragma once

#include "hombif/dichotomy.hpp"
#include "hombif/linalg.hpp"
#include "hombif/system.hpp"

#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

namespace hombif {

struct EvansSample {
  double lambda = 0.0;
  Mat plus;    ///< aligned d x r basis
  Mat minus;   ///< aligned d x n basis
  double value = 0.0;
  int sign = 0;
  /// Alignment segment. Signs are only comparable within one segment; a new
  /// segment starts after every non-hyperbolic gap.
  int segment = 0;
};

struct SignCertificate {
  double lo = 0.0;
  double hi = 0.0;
  int sign_lo = 0;
  int sign_hi = 0;
  Interval critical;  ///< final bracket of width <= refine_tol, or the zero plateau
  int bisections = 0;
};

struct TouchZero {
  Interval location;
  double min_abs = 0.0;
};

enum class CriticalKind { sign_change, touch_zero, non_hyperbolic };

/// Entry of the critical set approximation. Singletons have lo == hi.
struct CriticalEntry {
  Interval where;
  CriticalKind kind = CriticalKind::sign_change;
};

struct EvansScan {
  std::vector<EvansSample> samples;
  double zero_tol = 1e-8;   ///< relative to max |E|
  double zero_abs = 0.0;    ///< zero_tol * max |E|
  double refine_tol = 1e-6;
  std::vector<CriticalEntry> critical;  ///< sorted by lower end
  std::vector<SignCertificate> certificates;
  std::vector<TouchZero> touch_zeros;
  std::vector<Interval> non_hyperbolic;

  double lambda_min() const { return samples.front().lambda; }
  double lambda_max() const { return samples.back().lambda; }

  /// Sign of E at lambda from the scan data. Returns 0 where the scan cannot
  /// decide (at or next to a critical value). Second member is the segment.
  std::pair<int, int> sign_at(double lambda) const;
};

struct EvansOptions {
  DichotomyOptions dichotomy;
  double zero_tol = 1e-8;  ///< absolute, for single evaluations
  double angle_cap = std::numbers::pi / 3.0;
};

struct EvansScanOptions {
  EvansOptions evans;
  double zero_tol = 1e-8;   ///< relative to max |E| over the scan
  double refine_tol = 1e-6;
  int max_depth = 8;        ///< alignment bisection depth per grid interval
  /// Refine local |E| minima below this fraction of max |E| looking for
  /// touch-zeros between grid points.
  double touch_search_fraction = 0.1;
  /// Random orthogonal rotation applied to the first bases (0: none).
  std::uint64_t basis_seed = 0;
  bool parallel = true;
};

/// Projects prev onto the new subspace and re-orthonormalizes in prev's
/// column order. Throws Error(angle_too_large) or Error(rank_collapse).
Mat align_basis(const Mat& prev, const Mat& new_subspace,
                double angle_cap = std::numbers::pi / 3.0);

/// E(lambda) = det[plus | minus] with bases aligned against prev when given.
EvansSample evans_at(const SystemSpec& sys, double lambda, const EvansOptions& opts = {},
                     const EvansSample* prev = nullptr);

/// Sample from precomputed subspaces (used by scans and tests).
EvansSample evans_from_subspaces(double lambda, const Mat& plus, const Mat& minus,
                                 double zero_tol, const EvansSample* prev,
                                 double angle_cap = std::numbers::pi / 3.0);

EvansScan evans_scan(const SystemSpec& sys, const std::vector<double>& grid,
                     const EvansScanOptions& opts = {});

/// Uniform grid lo, lo + step, ..., hi (hi included when it is a multiple).
std::vector<double> uniform_grid(double lo, double hi, double step);

/// sgn E(lo) * sgn E(hi). Throws Error(endpoint_critical) if either sign is
/// undefined, Error(invalid_argument) outside the scan or across segments.
int parity(const EvansScan& scan, double lambda_lo, double lambda_hi);

}  // namespace hombif
