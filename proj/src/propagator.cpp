#include "hombif/propagator.hpp"

#include "hombif/error.hpp"
#include "hombif/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace hombif {

Mat variational_matrix(const SystemSpec& sys, double lambda, double t) {
  return sys.jacobian(t, sys.branch(t, lambda), lambda);
}

std::pair<Mat, double> FactoredPropagator::scaled_core() const {
  const Eigen::Index d = q.rows();
  Mat m = Mat::Identity(d, d);
  double log_scale = 0.0;
  for (const Mat& f : r) {
    m = f * m;
    const double s = m.cwiseAbs().maxCoeff();
    if (!(s > 0) || !std::isfinite(s)) {
      throw Error(ErrorKind::overflow, "propagator factor degenerate", t);
    }
    m /= s;
    log_scale += std::log(s);
  }
  return {m, log_scale};
}

Mat FactoredPropagator::assemble() const {
  const auto [m, log_scale] = scaled_core();
  if (log_scale > 700.0) {
    throw Error(ErrorKind::overflow,
                "transition matrix exceeds representable range on [" + std::to_string(s) +
                    ", " + std::to_string(t) + "]",
                t);
  }
  Mat out = std::exp(log_scale) * (q * m);
  if (!out.allFinite()) throw Error(ErrorKind::overflow, "transition matrix overflow", t);
  return out;
}

namespace {

Field matrix_field(const SystemSpec& sys, double lambda) {
  const int d = sys.dim();
  return [&sys, lambda, d](double t, const Vec& x) {
    const Mat a = variational_matrix(sys, lambda, t);
    const Eigen::Map<const Mat> xm(x.data(), d, d);
    Vec out(d * d);
    Eigen::Map<Mat>(out.data(), d, d) = a * xm;
    return out;
  };
}

}  // namespace

FactoredPropagator factored_transition(const SystemSpec& sys, double lambda, double s,
                                       double t, double tol, double window) {
  if (!(tol > 0) || !(window > 0)) {
    throw Error(ErrorKind::invalid_argument, "tolerance and window must be positive");
  }
  const int d = sys.dim();
  FactoredPropagator out;
  out.s = s;
  out.t = t;
  out.q = Mat::Identity(d, d);
  if (s == t) return out;

  const Field field = matrix_field(sys, lambda);
  IntegratorOptions opts;
  opts.tol = tol;
  const double dir = t > s ? 1.0 : -1.0;
  const auto windows = static_cast<long>(std::ceil(std::abs(t - s) / window - 1e-12));
  double a = s;
  for (long w = 1; w <= windows; ++w) {
    const double b = w == windows ? t : s + dir * window * static_cast<double>(w);
    Vec x0(d * d);
    Eigen::Map<Mat>(x0.data(), d, d) = out.q;
    const Trajectory traj = integrate_field(field, sys.switching_times(), a, x0, b, opts);
    const Eigen::Map<const Mat> xb(traj.back().data(), d, d);
    Eigen::HouseholderQR<Mat> qr(xb);
    Mat qf = qr.householderQ();
    Mat rf = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
      if (rf(i, i) < 0) {
        rf.row(i) *= -1.0;
        qf.col(i) *= -1.0;
      }
    }
    out.q = qf;
    out.r.push_back(rf);
    a = b;
  }
  return out;
}

Mat transition_matrix(const SystemSpec& sys, double lambda, double s, double t, double tol,
                      double window) {
  return factored_transition(sys, lambda, s, t, tol, window).assemble();
}

std::vector<Vec> propagate_vector(const SystemSpec& sys, double lambda, const Vec& v,
                                  const std::vector<double>& grid, double tol) {
  if (grid.empty()) return {};
  const Field field = [&sys, lambda](double t, const Vec& x) {
    return Vec(variational_matrix(sys, lambda, t) * x);
  };
  IntegratorOptions opts;
  opts.tol = tol;
  const double lo = std::min(0.0, grid.front());
  const double hi = std::max(0.0, grid.back());
  const Trajectory fwd = integrate_field(field, sys.switching_times(), 0.0, v, hi, opts);
  const Trajectory bwd = integrate_field(field, sys.switching_times(), 0.0, v, lo, opts);
  std::vector<Vec> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(t >= 0 ? fwd(t) : bwd(t));
  return out;
}

}  // namespace hombif
