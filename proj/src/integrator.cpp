#include "hombif/integrator.hpp"

#include "hombif/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace hombif {

Trajectory::Trajectory(std::vector<double> t, std::vector<Vec> x, std::vector<Vec> slope_in,
                       std::vector<Vec> slope_out, double tol)
    : t_(std::move(t)),
      x_(std::move(x)),
      in_(std::move(slope_in)),
      out_(std::move(slope_out)),
      tol_(tol) {}

Vec Trajectory::operator()(double t) const {
  const bool forward = t_.back() >= t_.front();
  const double lo = std::min(t_.front(), t_.back());
  const double hi = std::max(t_.front(), t_.back());
  if (t < lo - 1e-12 * (1 + std::abs(lo)) || t > hi + 1e-12 * (1 + std::abs(hi))) {
    throw Error(ErrorKind::invalid_argument, "time outside trajectory range", t);
  }
  if (t_.size() == 1) return x_.front();
  // index k with t in [t_k, t_{k+1}] along the integration direction
  std::size_t k;
  if (forward) {
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    k = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  } else {
    auto it = std::upper_bound(t_.begin(), t_.end(), t, std::greater<>());
    k = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
  }
  k = std::min(k, t_.size() - 2);
  const double h = t_[k + 1] - t_[k];
  const double s = (t - t_[k]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * x_[k] + h10 * h * out_[k] + h01 * x_[k + 1] + h11 * h * in_[k + 1];
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr std::array<double, 7> c = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Segment {
  double a;
  double b;

  // clamps t into the open segment so one-sided limits are used at the ends
  double open(double t) const {
    const double dir = b > a ? 1.0 : -1.0;
    if ((t - a) * dir <= 0) return std::nextafter(a, b);
    if ((t - b) * dir >= 0) return std::nextafter(b, a);
    return t;
  }
};

double scaled_norm(const Vec& v, const Vec& x0, const Vec& x1, double tol) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double sc = tol * (1.0 + std::max(std::abs(x0(i)), std::abs(x1(i))));
    worst = std::max(worst, std::abs(v(i)) / sc);
  }
  return worst;
}

}  // namespace

Trajectory integrate_field(const Field& field, const std::vector<double>& breakpoints,
                           double t0, const Vec& x0, double t1,
                           const IntegratorOptions& opts) {
  if (!(opts.tol > 0)) throw Error(ErrorKind::invalid_argument, "tolerance must be positive");
  if (!x0.allFinite()) throw Error(ErrorKind::invalid_argument, "non-finite initial state");
  if (opts.inside && !opts.inside(x0)) {
    throw Error(ErrorKind::domain_exit, "initial state outside the domain", t0);
  }

  std::vector<double> ts{t0};
  std::vector<Vec> xs{x0};
  std::vector<Vec> ins;
  std::vector<Vec> outs;
  if (t0 == t1) {
    const Vec f = field(t0, x0);
    return Trajectory(ts, xs, {f}, {f}, opts.tol);
  }

  const double dir = t1 > t0 ? 1.0 : -1.0;
  std::vector<double> ends;
  for (double s : breakpoints) {
    if ((s - t0) * dir > 0 && (t1 - s) * dir > 0) ends.push_back(s);
  }
  std::sort(ends.begin(), ends.end());
  if (dir < 0) std::reverse(ends.begin(), ends.end());
  ends.push_back(t1);

  Vec x = x0;
  double t = t0;
  double h_prev = 0.0;
  long steps = 0;
  bool first_slope = true;
  for (double seg_end : ends) {
    const Segment seg{t, seg_end};
    auto f = [&](double tt, const Vec& xx) { return field(seg.open(tt), xx); };
    Vec k1 = f(t, x);
    if (first_slope) {
      ins.push_back(k1);
      first_slope = false;
    }
    outs.push_back(k1);

    const double len = std::abs(seg_end - t);
    double h;
    if (opts.initial_step > 0) {
      h = opts.initial_step;
    } else if (h_prev > 0) {
      h = h_prev;
    } else {
      const Vec zero = Vec::Zero(x.size());
      const double d0 = scaled_norm(x, zero, zero, 1.0);
      const double d1 = scaled_norm(k1, x, x, 1.0);
      h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-4 : 0.01 * d0 / d1;
      h *= std::pow(opts.tol, 0.2) * 10.0;
    }
    h = std::min(h, len);
    if (opts.max_step > 0) h = std::min(h, opts.max_step);

    while ((seg_end - t) * dir > 0) {
      if (++steps > opts.max_steps) {
        throw Error(ErrorKind::step_failure, "step budget exhausted", t);
      }
      bool last = false;
      if (h >= std::abs(seg_end - t) * (1 - 1e-12)) {
        h = std::abs(seg_end - t);
        last = true;
      }
      const double hs = dir * h;
      const Vec k2 = f(t + c[1] * hs, x + hs * (a21 * k1));
      const Vec k3 = f(t + c[2] * hs, x + hs * (a31 * k1 + a32 * k2));
      const Vec k4 = f(t + c[3] * hs, x + hs * (a41 * k1 + a42 * k2 + a43 * k3));
      const Vec k5 = f(t + c[4] * hs, x + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const double t_new = last ? seg_end : t + hs;
      const Vec k6 =
          f(t + c[5] * hs, x + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const Vec x_new = x + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Vec k7 = f(t_new, x_new);
      const Vec err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double en = scaled_norm(err, x, x_new, opts.tol);
      if (!x_new.allFinite()) en = std::numeric_limits<double>::infinity();

      if (en <= 1.0) {
        t = t_new;
        x = x_new;
        k1 = k7;
        ts.push_back(t);
        xs.push_back(x);
        ins.push_back(k7);
        outs.push_back(k7);
        if (opts.inside && !opts.inside(x)) {
          throw Error(ErrorKind::domain_exit, "trajectory left the state domain", t);
        }
        if (!last) h_prev = h;
        const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        h *= fac;
      } else {
        h *= std::isfinite(en) ? std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9) : 0.1;
      }
      if (opts.max_step > 0) h = std::min(h, opts.max_step);
      const double h_floor = 16 * std::numeric_limits<double>::epsilon() *
                             std::max(1.0, std::abs(t));
      if (h < h_floor) {
        throw Error(ErrorKind::step_failure, "step size underflow", t);
      }
    }
    // the outgoing slope at a segment end is replaced by the next segment's
    outs.pop_back();
  }
  outs.push_back(ins.back());
  return Trajectory(std::move(ts), std::move(xs), std::move(ins), std::move(outs), opts.tol);
}

Trajectory integrate_ivp(const SystemSpec& sys, double lambda, double t0, const Vec& x0,
                         double t1, double tol) {
  if (x0.size() != sys.dim()) {
    throw Error(ErrorKind::invalid_argument, "initial state has wrong dimension");
  }
  IntegratorOptions opts;
  opts.tol = tol;
  const auto& domain = sys.domain();
  opts.inside = [&domain](const Vec& x) { return domain.contains(x); };
  return integrate_field([&](double t, const Vec& x) { return sys.rhs(t, x, lambda); },
                         sys.switching_times(), t0, x0, t1, opts);
}

}  // namespace hombif
