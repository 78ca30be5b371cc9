#include "support.hpp"

#include "hombif/evans.hpp"
#include "hombif/example.hpp"

#include <doctest.h>

#include <numbers>

using namespace hombif;
using testing::error_kind;
constexpr double pi = std::numbers::pi;

namespace {

EvansScan scan(const SystemSpec& sys, double lo, double hi, EvansScanOptions o = {}) {
  return evans_scan(sys, uniform_grid(lo, hi, 0.05), o);
}

int oracle_sign(double gamma) { return -4 * gamma > 0 ? 1 : -1; }

}  // namespace

TEST_CASE("align_basis") {
  const Mat b = testing::column(0.6, 0.8);
  CHECK((align_basis(b, b) - b).norm() < 1e-15);

  const double deg = pi / 180;
  const Mat rotated = testing::rotation(deg) * b;
  const Mat aligned = align_basis(b, -rotated);
  CHECK((b.transpose() * aligned).determinant() > 0);
  CHECK(subspace_angle(aligned, rotated) < 1e-14);

  CHECK(error_kind([&] { align_basis(testing::column(1, 0), testing::column(0, 1)); }) ==
        ErrorKind::angle_too_large);
}

TEST_CASE("evans_at on the example") {
  const SystemSpec sys = example::example_system({1.0, 2, example::GammaKind::linear});
  CHECK(evans_at(sys, 1.0).sign == -1);
  CHECK(evans_at(sys, -1.0).sign == 1);
  const EvansSample s = evans_from_subspaces(0.0, testing::column(1, 0), testing::column(0, 1), 1e-8, nullptr);
  CHECK(s.value == doctest::Approx(1.0));
  CHECK(s.sign == 1);
  // magnitude: |det| of the normalized spans (-2, g), (2, g) is 4|g| / (4 + g^2)
  CHECK(std::abs(evans_at(sys, 0.5).value) == doctest::Approx(4 * 0.5 / (4 + 0.25)).epsilon(1e-8));
}

TEST_CASE("scan sign law on the example kinds") {
  using K = example::GammaKind;
  struct Case {
    K kind;
    double lo, hi;
  };
  for (const Case c : {Case{K::linear, -2, 2}, Case{K::abs, -2, 2}, Case{K::sin, -7, 7}, Case{K::tan, -1.5, 1.5}}) {
    const example::ExampleConfig cfg{1.0, 3, c.kind};
    const EvansScan s = scan(example::example_system(cfg), c.lo, c.hi);
    int flip = 0;
    for (const auto& smp : s.samples) {
      const double g = cfg.gamma(smp.lambda);
      if (std::abs(g) <= 1e-3) continue;
      REQUIRE(smp.sign != 0);
      if (flip == 0) flip = smp.sign * oracle_sign(g);
      CHECK(smp.sign * flip == oracle_sign(g));
    }
  }
}

TEST_CASE("constant coefficient has no critical values") {
  const SystemSpec sys = testing::planar_example([](double) { return 1.0; });
  const EvansScan s = scan(sys, -2, 2);
  CHECK(s.critical.empty());
  CHECK(s.certificates.empty());
  CHECK(s.touch_zeros.empty());
}

TEST_CASE("critical values of sin and abs") {
  const EvansScan s = scan(example::example_system({1.0, 3, example::GammaKind::sin}), -7, 7);
  REQUIRE(s.certificates.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(s.certificates[static_cast<std::size_t>(i)].critical.mid() - (i - 2) * pi) <= 1e-4);
  }
  CHECK(s.touch_zeros.empty());

  const EvansScan a = scan(example::example_system({1.0, 3, example::GammaKind::abs}), -2, 2);
  CHECK(a.certificates.empty());
  REQUIRE(a.touch_zeros.size() == 1);
  CHECK(std::abs(a.touch_zeros[0].location.mid()) <= 1e-4);
}

TEST_CASE("touch-zero between grid points") {
  // |lambda - 0.013| never vanishes on the grid
  const SystemSpec sys = testing::planar_example([](double l) { return std::abs(l - 0.013); });
  const EvansScan s = scan(sys, -1, 1);
  CHECK(s.certificates.empty());
  REQUIRE(s.touch_zeros.size() == 1);
  CHECK(std::abs(s.touch_zeros[0].location.mid() - 0.013) <= 1e-5);
}

TEST_CASE("certificates and the zero set") {
  const EvansScan s = scan(example::example_system({1.0, 3, example::GammaKind::sin}), -7, 7);
  for (const auto& c : s.certificates) {
    CHECK(c.sign_lo == -c.sign_hi);
    CHECK(c.critical.width() <= s.refine_tol);
    const bool listed = std::any_of(s.critical.begin(), s.critical.end(), [&](const CriticalEntry& e) {
      return e.kind == CriticalKind::sign_change && e.where.lo == c.critical.lo;
    });
    CHECK(listed);
    for (const auto& t : s.touch_zeros) CHECK(!(t.location.lo <= c.critical.hi && c.critical.lo <= t.location.hi));
    if (std::abs(c.critical.mid()) > 0.1) {
      // plain bisection: width halves with every step
      CHECK(c.critical.width() == doctest::Approx((c.hi - c.lo) / std::ldexp(1.0, c.bisections)).epsilon(1e-9));
    }
  }
}

TEST_CASE("parity") {
  const EvansScan lin = scan(example::example_system({1.0, 2, example::GammaKind::linear}), -2, 2);
  CHECK(parity(lin, -1, 1) == -1);
  CHECK(parity(lin, 0.5, 1.5) == 1);
  CHECK(error_kind([&] { parity(lin, 0.0, 1.0); }) == ErrorKind::endpoint_critical);
  CHECK(error_kind([&] { parity(lin, -3.0, 1.0); }) == ErrorKind::invalid_argument);
  const EvansScan abs = scan(example::example_system({1.0, 2, example::GammaKind::abs}), -2, 2);
  CHECK(parity(abs, -1, 1) == 1);
}

TEST_CASE("basis-choice invariance") {
  const SystemSpec sys = example::example_system({1.0, 3, example::GammaKind::sin});
  const EvansScan ref = scan(sys, -4, 4);
  for (std::uint64_t seed : {3u, 17u, 99u}) {
    EvansScanOptions o;
    o.basis_seed = seed;
    const EvansScan s = scan(sys, -4, 4, o);
    REQUIRE(s.certificates.size() == ref.certificates.size());
    for (std::size_t i = 0; i < s.certificates.size(); ++i) {
      CHECK(std::abs(s.certificates[i].critical.mid() - ref.certificates[i].critical.mid()) <= ref.refine_tol);
    }
    REQUIRE(s.samples.size() == ref.samples.size());
    const int flip = s.samples[0].sign * ref.samples[0].sign;
    for (std::size_t i = 0; i < s.samples.size(); ++i) CHECK(s.samples[i].sign == flip * ref.samples[i].sign);
  }
}

TEST_CASE("zero plateau between opposite signs") {
  // gamma vanishes on [-0.2, 0.2] and changes sign across it
  const SystemSpec sys = testing::planar_example([](double l) {
    return l > 0.2 ? l - 0.2 : (l < -0.2 ? l + 0.2 : 0.0);
  });
  const EvansScan s = scan(sys, -1, 1);
  REQUIRE(s.certificates.size() == 1);
  CHECK(s.certificates[0].critical.lo == doctest::Approx(-0.2));
  CHECK(s.certificates[0].critical.hi == doctest::Approx(0.2));
}

TEST_CASE("non-hyperbolic region splits the scan into segments") {
  // rates vanish for |lambda| < 0.5
  const SystemSpec sys = testing::linear_system([](double l) {
    const double a = std::max(0.0, std::abs(l) - 0.5);
    return (Mat(2, 2) << -a, 0, 0, a).finished();
  });
  const EvansScan s = scan(sys, -1, 1);
  REQUIRE(s.non_hyperbolic.size() == 1);
  CHECK(s.non_hyperbolic[0].lo <= -0.45);
  CHECK(s.non_hyperbolic[0].hi >= 0.45);
  CHECK(s.samples.front().segment != s.samples.back().segment);
  CHECK(error_kind([&] { parity(s, -0.9, 0.9); }) == ErrorKind::invalid_argument);
}

TEST_CASE("uniform grid") {
  CHECK(uniform_grid(-2, 2, 0.05).size() == 81);
  const auto g = uniform_grid(0, 1, 0.3);
  CHECK(g.size() == 5);
  CHECK(g.back() == 1.0);
  CHECK(error_kind([] { uniform_grid(1, 0, 0.1); }) == ErrorKind::invalid_argument);
}
