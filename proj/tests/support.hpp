#pragma once

#include "hombif/error.hpp"
#include "hombif/linalg.hpp"
#include "hombif/system.hpp"

#include <cmath>
#include <functional>

namespace testing {

using hombif::Mat;
using hombif::Vec;

/// Autonomous linear system x' = A(lambda) x.
inline hombif::SystemSpec linear_system(std::function<Mat(double)> a) {
  const int d = static_cast<int>(a(0.0).rows());
  return hombif::SystemSpec(
      d, [a](double, const Vec& x, double l) -> Vec { return a(l) * x; },
      [a](double, const Vec&, double l) -> Mat { return a(l); });
}

inline hombif::SystemSpec constant_system(const Mat& a) {
  return linear_system([a](double) { return a; });
}

/// Planar system x1' = -sgn(t) x1, x2' = g(lambda) x1 + sgn(t) x2 + beta x1^n
/// with a caller-supplied coefficient g.
inline hombif::SystemSpec planar_example(std::function<double(double)> g, double beta = 1.0,
                                         int n = 2) {
  auto sgn = [](double t) { return double((t > 0) - (t < 0)); };
  return hombif::SystemSpec(
      2,
      [=](double t, const Vec& x, double l) -> Vec {
        Vec f(2);
        f << -sgn(t) * x(0), g(l) * x(0) + sgn(t) * x(1) + beta * std::pow(x(0), n);
        return f;
      },
      [=](double t, const Vec& x, double l) -> Mat {
        Mat j(2, 2);
        j << -sgn(t), 0.0, g(l) + beta * n * std::pow(x(0), n - 1), sgn(t);
        return j;
      },
      {0.0});
}

/// Solution of the planar system above through x(0) = (a, b), obtained by
/// integrating the two scalar linear equations separately for t > 0 and t < 0.
inline Vec planar_solution(double beta, int n, double g, double a, double b, double t) {
  const double s = t >= 0 ? 1.0 : -1.0;
  const double u = std::abs(t);
  // x1 = a e^{-u}; x2' = s (x2 + s(g x1 + beta x1^n)) in u-time, solved by
  // variation of constants from x2(0) = b.
  const double x1 = a * std::exp(-u);
  const double c1 = g * a / 2.0;
  const double cn = beta * std::pow(a, n) / (n + 1.0);
  const double x2 = b * std::exp(u) + s * (c1 * (std::exp(u) - std::exp(-u)) +
                                           cn * (std::exp(u) - std::exp(-n * u)));
  Vec x(2);
  x << x1, x2;
  return x;
}

inline Mat rotation(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

inline Mat column(double a, double b) {
  Mat m(2, 1);
  m << a, b;
  return m.normalized();
}

template <class F>
hombif::ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const hombif::Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected hombif::Error");
}

}  // namespace testing
