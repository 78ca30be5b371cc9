#include "hombif/system.hpp"

#include "hombif/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hombif {

StateDomain StateDomain::whole_space() {
  return {[](const Vec&) { return true; },
          [](const Vec&) { return std::numeric_limits<double>::infinity(); }};
}

SystemSpec::SystemSpec(int dim, RhsFn rhs, JacobianFn jacobian,
                       std::vector<double> switching_times, BranchFn branch,
                       Interval param_interval, StateDomain domain, bool admissible)
    : dim_(dim),
      rhs_(std::move(rhs)),
      jacobian_(std::move(jacobian)),
      switching_times_(std::move(switching_times)),
      branch_(std::move(branch)),
      param_interval_(param_interval),
      domain_(std::move(domain)),
      admissible_(admissible) {
  if (dim_ <= 0) throw Error(ErrorKind::invalid_argument, "dimension must be positive");
  if (!rhs_ || !jacobian_) {
    throw Error(ErrorKind::invalid_argument, "rhs and jacobian are required");
  }
  for (std::size_t i = 1; i < switching_times_.size(); ++i) {
    if (!(switching_times_[i - 1] < switching_times_[i])) {
      throw Error(ErrorKind::invalid_argument, "switching times must be strictly increasing");
    }
  }
  if (!(param_interval_.lo < param_interval_.hi)) {
    throw Error(ErrorKind::invalid_argument, "empty parameter interval");
  }
  if (!domain_.contains) domain_.contains = [](const Vec&) { return true; };
  if (!domain_.distance_to_boundary) {
    domain_.distance_to_boundary = [](const Vec&) {
      return std::numeric_limits<double>::infinity();
    };
  }
}

Vec SystemSpec::branch(double t, double lambda) const {
  if (!branch_) return Vec::Zero(dim_);
  return branch_(t, lambda);
}

std::vector<double> SystemSpec::switching_times_between(double a, double b) const {
  std::vector<double> out;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  for (double s : switching_times_) {
    if (lo < s && s < hi) out.push_back(s);
  }
  if (b < a) std::reverse(out.begin(), out.end());
  return out;
}

namespace {

bool near_switch(const SystemSpec& sys, double t, double margin) {
  return std::any_of(sys.switching_times().begin(), sys.switching_times().end(),
                     [&](double s) { return std::abs(t - s) <= margin; });
}

}  // namespace

double jacobian_consistency(const SystemSpec& sys, Interval t_box, double x_radius,
                            Interval lambda_box, int samples, std::uint64_t seed,
                            double step) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ut(t_box.lo, t_box.hi);
  std::uniform_real_distribution<double> ux(-x_radius, x_radius);
  std::uniform_real_distribution<double> ul(lambda_box.lo, lambda_box.hi);
  const int d = sys.dim();
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    double t = ut(rng);
    while (near_switch(sys, t, 2 * step)) t = ut(rng);
    Vec x(d);
    for (int i = 0; i < d; ++i) x(i) = ux(rng);
    const double lambda = ul(rng);
    const Mat jac = sys.jacobian(t, x, lambda);
    Mat fd(d, d);
    for (int j = 0; j < d; ++j) {
      Vec xp = x, xm = x;
      xp(j) += step;
      xm(j) -= step;
      fd.col(j) = (sys.rhs(t, xp, lambda) - sys.rhs(t, xm, lambda)) / (2 * step);
    }
    const double err = (jac - fd).norm() / std::max(1.0, jac.norm());
    worst = std::max(worst, err);
  }
  return worst;
}

double branch_residual(const SystemSpec& sys, double lambda,
                       const std::vector<double>& grid, double step) {
  double worst = 0.0;
  for (double t : grid) {
    if (near_switch(sys, t, 2 * step)) continue;
    const Vec dphi = (sys.branch(t + step, lambda) - sys.branch(t - step, lambda)) / (2 * step);
    const Vec f = sys.rhs(t, sys.branch(t, lambda), lambda);
    worst = std::max(worst, (dphi - f).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace hombif
