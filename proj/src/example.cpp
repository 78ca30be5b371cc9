#include "hombif/example.hpp"

#include "hombif/error.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <complex>
#include <numbers>
#include <string>

namespace hombif::example {

std::string_view to_string(GammaKind kind) {
  switch (kind) {
    case GammaKind::linear: return "linear";
    case GammaKind::abs: return "abs";
    case GammaKind::sin: return "sin";
    case GammaKind::tan: return "tan";
  }
  return "linear";
}

GammaKind parse_gamma_kind(std::string_view name) {
  if (name == "linear") return GammaKind::linear;
  if (name == "abs") return GammaKind::abs;
  if (name == "sin") return GammaKind::sin;
  if (name == "tan") return GammaKind::tan;
  throw Error(ErrorKind::invalid_argument, "unknown gamma kind '" + std::string(name) + "'");
}

void ExampleConfig::validate() const {
  if (beta == 0.0) throw Error(ErrorKind::invalid_argument, "beta must be nonzero");
  if (n < 2) throw Error(ErrorKind::invalid_argument, "n must be at least 2");
}

Interval ExampleConfig::param_interval() const {
  if (kind == GammaKind::tan) return {-std::numbers::pi / 2, std::numbers::pi / 2};
  return {};
}

double ExampleConfig::gamma(double lambda) const {
  switch (kind) {
    case GammaKind::linear: return lambda;
    case GammaKind::abs: return std::abs(lambda);
    case GammaKind::sin: return std::sin(lambda);
    case GammaKind::tan: {
      // stay off the poles at +-pi/2
      const double edge = std::numbers::pi / 2 - 1e-6;
      return std::tan(std::clamp(lambda, -edge, edge));
    }
  }
  return lambda;
}

namespace {

double sgn(double t) { return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0); }

// Templated on the scalar so the time derivative can be checked by complex
// step; branch decisions use the real part.
template <typename S>
std::array<S, 2> closed_form(double beta, int n, double gamma, double xi1, double xi2, S t) {
  const double st = sgn(std::real(t));
  const S abs_t = st * t;
  const double b = beta / (n + 1);
  const double xin = std::pow(xi1, n);
  const S x1 = std::exp(-abs_t) * xi1;
  const S x2 = (xi2 + st * (0.5 * gamma * xi1 + b * xin)) * std::exp(abs_t) -
               st * (0.5 * gamma * xi1 * std::exp(-abs_t) +
                     b * xin * std::exp(-static_cast<double>(n) * abs_t));
  return {x1, x2};
}

}  // namespace

Vec closed_form_solution_gamma(double beta, int n, double gamma, const Vec& xi, double t) {
  const auto x = closed_form<double>(beta, n, gamma, xi(0), xi(1), t);
  if (t == 0.0) return xi;
  Vec out(2);
  out << x[0], x[1];
  return out;
}

Vec closed_form_solution(const ExampleConfig& cfg, double lambda, const Vec& xi, double t) {
  return closed_form_solution_gamma(cfg.beta, cfg.n, cfg.gamma(lambda), xi, t);
}

SystemSpec example_system(const ExampleConfig& cfg) {
  cfg.validate();
  const ExampleConfig c = cfg;
  auto rhs = [c](double t, const Vec& x, double lambda) {
    const double s = sgn(t);
    Vec f(2);
    f(0) = -s * x(0);
    f(1) = c.gamma(lambda) * x(0) + s * x(1) + c.beta * std::pow(x(0), c.n);
    return f;
  };
  auto jac = [c](double t, const Vec& x, double lambda) {
    const double s = sgn(t);
    Mat j(2, 2);
    j << -s, 0.0, c.gamma(lambda) + c.beta * c.n * std::pow(x(0), c.n - 1), s;
    return j;
  };
  return SystemSpec(2, rhs, jac, {0.0}, {}, c.param_interval(), StateDomain::whole_space(),
                    true);
}

std::vector<double> homoclinic_initial_conditions(const ExampleConfig& cfg, double lambda) {
  std::vector<double> roots{0.0};
  // xi1^(n-1) = s
  const double s = -(cfg.n + 1) * cfg.gamma(lambda) / (2.0 * cfg.beta);
  const int m = cfg.n - 1;
  if (s != 0.0) {
    if (m % 2 == 1) {
      roots.push_back(std::copysign(std::pow(std::abs(s), 1.0 / m), s));
    } else if (s > 0) {
      const double r = std::pow(s, 1.0 / m);
      roots.push_back(r);
      roots.push_back(-r);
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

double oracle_evans(const ExampleConfig& cfg, double lambda) {
  return -4.0 * cfg.gamma(lambda);
}

double closed_form_max_residual(double beta, int n, double h) {
  double worst = 0.0;
  const double step = h > 0 ? h : 1e-20;
  for (double gamma : {-1.3, -0.2, 0.0, 0.7, 2.0}) {
    for (double xi1 : {-1.1, -0.4, 0.0, 0.5, 1.2}) {
      for (double xi2 : {-0.6, 0.0, 0.3}) {
        for (double t : {-3.0, -1.7, -0.5, -0.01, 0.01, 0.5, 1.3, 2.9}) {
          const auto xc =
              closed_form<std::complex<double>>(beta, n, gamma, xi1, xi2, {t, step});
          const double d1 = std::imag(xc[0]) / step;
          const double d2 = std::imag(xc[1]) / step;
          const double x1 = std::real(xc[0]);
          const double x2 = std::real(xc[1]);
          const double s = sgn(t);
          const double f1 = -s * x1;
          const double f2 = gamma * x1 + s * x2 + beta * std::pow(x1, n);
          const double scale = 1.0 + std::abs(x1) + std::abs(x2);
          worst = std::max({worst, std::abs(d1 - f1) / scale, std::abs(d2 - f2) / scale});
        }
      }
    }
  }
  return worst;
}

}  // namespace hombif::example
