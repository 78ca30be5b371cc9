#include "hombif/dichotomy.hpp"

#include "hombif/error.hpp"
#include "hombif/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace hombif {

DichotomySubspaces subspace_from_propagator(const Mat& core, double log_scale, const Mat& q,
                                            double lambda, HalfLine halfline,
                                            const DichotomyOptions& opts) {
  const auto d = static_cast<int>(core.rows());
  Eigen::JacobiSVD<Mat> svd(core, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec sv = svd.singularValues();
  std::vector<double> logs(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    logs[static_cast<std::size_t>(i)] =
        sv(i) > 0 ? std::log(sv(i)) + log_scale : -std::numeric_limits<double>::infinity();
  }

  // k = number of smallest singular directions kept
  int k = 0;
  double log_gap = 0.0;
  auto gap_at = [&](int kk) {
    if (kk <= 0 || kk >= d) return std::numeric_limits<double>::infinity();
    return logs[static_cast<std::size_t>(d - kk - 1)] - logs[static_cast<std::size_t>(d - kk)];
  };
  if (opts.rank_hint) {
    k = *opts.rank_hint;
    if (k < 0 || k > d) throw Error(ErrorKind::invalid_argument, "rank hint out of range");
    log_gap = gap_at(k);
  } else if (d == 1) {
    k = logs[0] < 0 ? 1 : 0;
    log_gap = std::abs(logs[0]);
  } else {
    for (int kk = 1; kk < d; ++kk) {
      const double g = gap_at(kk);
      if (g > log_gap) {
        log_gap = g;
        k = kk;
      }
    }
  }
  const double gap = std::exp(std::min(log_gap, 700.0));
  if (!(gap > opts.gap_threshold)) {
    throw Error(ErrorKind::no_gap,
                std::string(halfline == HalfLine::plus ? "plus" : "minus") +
                    " half-line: singular value gap " + std::to_string(gap) +
                    " below threshold at horizon " + std::to_string(opts.horizon),
                lambda);
  }

  DichotomySubspaces out;
  out.lambda = lambda;
  out.halfline = halfline;
  out.basis = svd.matrixV().rightCols(k);
  // fixed orientation: last significant entry of each column positive
  for (Eigen::Index c = 0; c < out.basis.cols(); ++c) {
    for (Eigen::Index i = d - 1; i >= 0; --i) {
      if (std::abs(out.basis(i, c)) > 1e-8) {
        if (out.basis(i, c) < 0) out.basis.col(c) *= -1.0;
        break;
      }
    }
  }
  out.rank = k;
  out.gap = gap;
  out.horizon = opts.horizon;
  out.far_annihilator = (q * svd.matrixU()).leftCols(d - k);
  out.log_singular_values = std::move(logs);
  return out;
}

namespace {

DichotomySubspaces half_line_subspace(const SystemSpec& sys, double lambda,
                                      const DichotomyOptions& opts, HalfLine halfline) {
  if (!(opts.horizon > 0)) throw Error(ErrorKind::invalid_argument, "horizon must be positive");
  if (!(opts.gap_threshold > 1)) {
    throw Error(ErrorKind::invalid_argument, "gap threshold must exceed 1");
  }
  const double end = halfline == HalfLine::plus ? opts.horizon : -opts.horizon;
  const FactoredPropagator fp =
      factored_transition(sys, lambda, 0.0, end, opts.tol, opts.window);
  const auto [core, log_scale] = fp.scaled_core();
  return subspace_from_propagator(core, log_scale, fp.q, lambda, halfline, opts);
}

}  // namespace

DichotomySubspaces stable_subspace_plus(const SystemSpec& sys, double lambda,
                                        const DichotomyOptions& opts) {
  return half_line_subspace(sys, lambda, opts, HalfLine::plus);
}

DichotomySubspaces unstable_subspace_minus(const SystemSpec& sys, double lambda,
                                           const DichotomyOptions& opts) {
  return half_line_subspace(sys, lambda, opts, HalfLine::minus);
}

std::vector<std::pair<double, double>> default_sample_grid(HalfLine halfline, double span) {
  std::vector<std::pair<double, double>> grid;
  const double sgn = halfline == HalfLine::plus ? 1.0 : -1.0;
  for (double s : {0.0, 1.0, 2.0}) {
    for (double tau = 0.0; tau <= span - s + 1e-12; tau += 0.5) {
      grid.emplace_back(sgn * s, sgn * (s + tau));
    }
  }
  return grid;
}

DichotomyConstants estimate_dichotomy_constants(
    const SystemSpec& sys, double lambda, const DichotomySubspaces& sub,
    const std::vector<std::pair<double, double>>& sample_grid, double tol) {
  if (sub.rank == 0) return {1.0, std::numeric_limits<double>::infinity(), 0.0};
  if (sample_grid.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "need at least two (s, t) samples");
  }
  const bool plus = sub.halfline == HalfLine::plus;
  std::vector<double> tau;
  std::vector<double> logn;
  for (const auto& [s, t] : sample_grid) {
    const bool ordered = plus ? (0.0 <= s && s <= t) : (t <= s && s <= 0.0);
    if (!ordered) {
      throw Error(ErrorKind::invalid_argument, "sample pair outside the half-line ordering");
    }
    const Mat bs = orthonormalize(transition_matrix(sys, lambda, 0.0, s, tol) * sub.basis);
    const Mat img = transition_matrix(sys, lambda, s, t, tol) * bs;
    Eigen::JacobiSVD<Mat> svd(img);
    tau.push_back(std::abs(t - s));
    logn.push_back(std::log(std::max(svd.singularValues()(0), 1e-300)));
  }
  const auto m = static_cast<double>(tau.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    st += tau[i];
    sy += logn[i];
    stt += tau[i] * tau[i];
    sty += tau[i] * logn[i];
  }
  const double denom = m * stt - st * st;
  if (!(denom > 0)) throw Error(ErrorKind::invalid_argument, "degenerate sample grid");
  const double slope = (m * sty - st * sy) / denom;
  const double intercept = (sy - slope * st) / m;
  const double alpha = -slope;
  double res = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double e = logn[i] - (intercept - alpha * tau[i]);
    res += e * e;
  }
  res = std::sqrt(res / m);
  if (!(alpha > 1e-9)) {
    throw Error(ErrorKind::non_decay,
                "fitted decay rate " + std::to_string(alpha) + " is not positive", lambda);
  }
  double log_k = 0.0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    log_k = std::max(log_k, logn[i] + alpha * tau[i]);
  }
  return {std::exp(log_k), alpha, res};
}

IndexReport fredholm_index_check(const DichotomySubspaces& plus,
                                 const DichotomySubspaces& minus, double angle_threshold) {
  IndexReport rep;
  rep.plus_rank = plus.rank;
  rep.minus_rank = minus.rank;
  rep.dim = static_cast<int>(plus.basis.rows());
  rep.index = rep.plus_rank + rep.minus_rank - rep.dim;
  const auto angles = principal_angles(plus.basis, minus.basis);
  rep.smallest_angle = angles.empty() ? std::numbers::pi / 2 : angles.front();
  for (double a : angles) {
    if (a < angle_threshold) ++rep.intersection_dim;
  }
  return rep;
}

}  // namespace hombif
