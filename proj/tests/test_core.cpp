#include "support.hpp"

#include "hombif/example.hpp"
#include "hombif/integrator.hpp"
#include "hombif/propagator.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace hombif;
using testing::error_kind;

TEST_CASE("orthonormalize keeps the span and column order") {
  Mat a(3, 2);
  a << 1, 1, 0, 1, 0, 0;
  const Mat q = orthonormalize(a);
  CHECK((q.transpose() * q - Mat::Identity(2, 2)).norm() < 1e-14);
  CHECK(q(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(q(1, 1)) == doctest::Approx(1.0));
  CHECK(subspace_angle(q, orthonormalize(a.rowwise().reverse())) < 1e-14);
}

TEST_CASE("orthonormalize rejects dependent columns") {
  Mat a(2, 2);
  a << 1, 2, 1, 2;
  CHECK(error_kind([&] { orthonormalize(a); }) == ErrorKind::rank_collapse);
}

TEST_CASE("principal angles between planar lines") {
  const Mat e1 = testing::column(1, 0);
  const Mat v = testing::column(std::cos(0.3), std::sin(0.3));
  CHECK(principal_angles(e1, v).front() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(subspace_angle(e1, e1) < 1e-15);
  CHECK(principal_angles(e1, testing::column(1e-9, 1)).front() ==
        doctest::Approx(std::numbers::pi / 2 - 1e-9));
  CHECK(principal_angles(e1, testing::column(1, 1e-12)).front() == doctest::Approx(1e-12).epsilon(1e-6));
}

TEST_CASE("orthogonal complement") {
  const Mat b = testing::column(1, 2);
  const Mat c = orthogonal_complement(b);
  CHECK(c.cols() == 1);
  CHECK(std::abs((b.transpose() * c)(0, 0)) < 1e-15);
}

TEST_CASE("system spec validates its data") {
  auto rhs = [](double, const Vec& x, double) { return x; };
  auto jac = [](double, const Vec& x, double) { return Mat::Identity(x.size(), x.size()); };
  CHECK(error_kind([&] { SystemSpec(0, rhs, jac); }) == ErrorKind::invalid_argument);
  CHECK(error_kind([&] { SystemSpec(1, rhs, jac, {1.0, 0.0}); }) == ErrorKind::invalid_argument);
  CHECK(error_kind([&] { SystemSpec(1, rhs, jac, {0.0, 0.0}); }) == ErrorKind::invalid_argument);
  CHECK(error_kind([&] { SystemSpec(1, {}, jac); }) == ErrorKind::invalid_argument);
  CHECK(error_kind([&] { SystemSpec(1, rhs, jac, {}, {}, Interval{1.0, 1.0}); }) ==
        ErrorKind::invalid_argument);

  const SystemSpec sys(2, rhs, jac, {-1.0, 0.0, 2.0});
  CHECK(sys.branch(3.0, 0.5).isZero());
  CHECK(sys.switching_times_between(-5, 5) == std::vector<double>{-1.0, 0.0, 2.0});
  CHECK(sys.switching_times_between(5, -5) == std::vector<double>{2.0, 0.0, -1.0});
  CHECK(sys.switching_times_between(0.0, 2.0).empty());
}

TEST_CASE("jacobian consistency separates right from wrong derivatives") {
  const SystemSpec good = example::example_system({1.0, 3, example::GammaKind::sin});
  CHECK(jacobian_consistency(good, {-3, 3}, 2.0, {-3, 3}, 100, 1) <= 1e-5);

  const SystemSpec wrong(
      1, [](double, const Vec& x, double) { return Vec(x.array().square()); },
      [](double, const Vec& x, double) { return Mat::Constant(1, 1, x(0)); });
  CHECK(jacobian_consistency(wrong, {-1, 1}, 1.0, {0, 1}, 20, 1) > 0.1);
}

TEST_CASE("branch residual of a prescribed nonzero branch") {
  auto rhs = [](double t, const Vec& x, double) {
    return Vec::Constant(1, -x(0) + std::sin(t) + std::cos(t));
  };
  auto jac = [](double, const Vec&, double) { return Mat::Constant(1, 1, -1.0); };
  const std::vector<double> grid{-2, -1, 0.5, 1.5, 3};
  const SystemSpec right(1, rhs, jac, {}, [](double t, double) { return Vec::Constant(1, std::sin(t)); });
  const SystemSpec wrong(1, rhs, jac, {}, [](double t, double) { return Vec::Constant(1, std::cos(t)); });
  CHECK(branch_residual(right, 0.0, grid) < 1e-8);
  CHECK(branch_residual(wrong, 0.0, grid) > 0.1);
}

TEST_CASE("zero field keeps the state constant") {
  const SystemSpec zero = testing::constant_system(Mat::Zero(2, 2));
  Vec x0(2);
  x0 << 1, 2;
  const Trajectory tr = integrate_ivp(zero, 0.0, 0.0, x0, 5.0, 1e-10);
  CHECK(tr.t_end() == 5.0);
  CHECK((tr.back() - x0).norm() == 0.0);
  CHECK((tr(2.5) - x0).norm() == 0.0);
  CHECK(Trajectory::interpolation_order == 3);
}

TEST_CASE("integration across the switching time matches the closed form") {
  const double tol = 1e-10;
  const SystemSpec sys = example::example_system({1.0, 2, example::GammaKind::linear});
  Vec xi(2);
  xi << 0.7, -0.3;
  for (double t1 : {2.0, -2.0}) {
    const Trajectory tr = integrate_ivp(sys, 1.0, 0.0, xi, t1, tol);
    const Vec expect = testing::planar_solution(1.0, 2, 1.0, 0.7, -0.3, t1);
    CHECK((tr.back() - expect).lpNorm<Eigen::Infinity>() <= 10 * tol * (1 + expect.norm()));
  }
  // start on the far side so the trajectory crosses t = 0
  const Vec x0 = testing::planar_solution(1.0, 2, 1.0, 0.7, -0.3, -1.0);
  const Trajectory tr = integrate_ivp(sys, 1.0, -1.0, x0, 1.5, tol);
  const Vec expect = testing::planar_solution(1.0, 2, 1.0, 0.7, -0.3, 1.5);
  CHECK((tr.back() - expect).lpNorm<Eigen::Infinity>() <= 10 * tol * (1 + expect.norm()));
  CHECK((tr(0.0) - xi).lpNorm<Eigen::Infinity>() <= 10 * tol);
}

TEST_CASE("segmentation consistency") {
  const double tol = 1e-10;
  const SystemSpec sys = example::example_system({1.0, 3, example::GammaKind::sin});
  Vec x0(2);
  x0 << 0.4, 0.2;
  const Vec whole = integrate_ivp(sys, 0.8, -1.0, x0, 1.0, tol).back();
  const Vec half = integrate_ivp(sys, 0.8, -1.0, x0, 0.0, tol).back();
  const Vec composed = integrate_ivp(sys, 0.8, 0.0, half, 1.0, tol).back();
  CHECK((whole - composed).lpNorm<Eigen::Infinity>() <= 10 * tol);

  // coarse or fine first step into the switching time
  const Field f = [&](double t, const Vec& x) { return sys.rhs(t, x, 0.8); };
  IntegratorOptions coarse;
  coarse.tol = tol;
  coarse.initial_step = 0.9;
  IntegratorOptions fine = coarse;
  fine.initial_step = 1e-6;
  const Vec a = integrate_field(f, {0.0}, -1.0, x0, 1.0, coarse).back();
  const Vec b = integrate_field(f, {0.0}, -1.0, x0, 1.0, fine).back();
  CHECK((a - b).lpNorm<Eigen::Infinity>() <= 10 * tol);
}

TEST_CASE("dense output interpolates between accepted steps") {
  const SystemSpec decay = testing::constant_system(Mat::Constant(1, 1, -1.0));
  const Trajectory tr = integrate_ivp(decay, 0.0, 0.0, Vec::Ones(1), 4.0, 1e-8);
  for (double t : {0.13, 1.01, 2.5, 3.77}) CHECK(tr(t)(0) == doctest::Approx(std::exp(-t)).epsilon(1e-5));
  const auto& ts = tr.times();
  CHECK(std::is_sorted(ts.begin(), ts.end()));
}

TEST_CASE("domain exit and step failure") {
  const SystemSpec grow(
      1, [](double, const Vec& x, double) { return x; },
      [](double, const Vec&, double) { return Mat::Identity(1, 1); }, {}, {}, {},
      StateDomain{[](const Vec& x) { return std::abs(x(0)) < 2.0; },
                  [](const Vec& x) { return 2.0 - std::abs(x(0)); }});
  try {
    integrate_ivp(grow, 0.0, 0.0, Vec::Ones(1), 3.0, 1e-10);
    FAIL("expected DomainExit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::domain_exit);
    REQUIRE(e.where());
    CHECK(*e.where() >= std::log(2.0) - 0.5);
    CHECK(*e.where() <= std::log(2.0) + 0.5);
  }
  const SystemSpec blow(
      1, [](double, const Vec& x, double) { return Vec(x.array().square()); },
      [](double, const Vec& x, double) { return Mat::Constant(1, 1, 2 * x(0)); });
  CHECK(error_kind([&] { integrate_ivp(blow, 0.0, 0.0, Vec::Ones(1), 2.0, 1e-10); }) ==
        ErrorKind::step_failure);
}

TEST_CASE("transition matrix oracle values") {
  const SystemSpec sys = example::example_system({1.0, 2, example::GammaKind::linear});
  const double e = std::exp(1.0);
  Mat fwd(2, 2);
  fwd << 1 / e, 0, (e - 1 / e) / 2, e;
  CHECK((transition_matrix(sys, 1.0, 0.0, 1.0, 1e-12) - fwd).norm() < 1e-9);
  // t < 0: x1' = x1, x2' = x1 - x2
  Mat bwd(2, 2);
  bwd << 1 / e, 0, (1 / e - e) / 2, e;
  CHECK((transition_matrix(sys, 1.0, 0.0, -1.0, 1e-12) - bwd).norm() < 1e-9);
  CHECK((transition_matrix(sys, 0.3, 0.7, 0.7, 1e-12) - Mat::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("propagator cocycle and reversibility") {
  const double tol = 1e-10;
  const SystemSpec sys = example::example_system({1.0, 3, example::GammaKind::sin});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 10; ++k) {
    const double t = u(rng), s = u(rng), r = u(rng);
    const Mat ts = transition_matrix(sys, 0.4, s, t, tol);
    const Mat sr = transition_matrix(sys, 0.4, r, s, tol);
    const Mat tr = transition_matrix(sys, 0.4, r, t, tol);
    CHECK((tr - ts * sr).norm() <= 10 * tol * ts.norm() * sr.norm());
  }
  for (int k = 0; k < 10; ++k) {
    const double t = u(rng) / 5, s = u(rng) / 5;
    const Mat a = transition_matrix(sys, -0.6, s, t, tol);
    const Mat b = transition_matrix(sys, -0.6, t, s, tol);
    CHECK((a * b - Mat::Identity(2, 2)).norm() <= 10 * tol * a.norm() * b.norm());
  }
}

TEST_CASE("nonlinear flow cocycle") {
  const double tol = 1e-10;
  const SystemSpec sys = example::example_system({-1.0, 3, example::GammaKind::sin});
  Vec x0(2);
  x0 << 0.3, -0.1;
  const Vec direct = integrate_ivp(sys, 1.0, -2.0, x0, 1.5, tol).back();
  const Vec mid = integrate_ivp(sys, 1.0, -2.0, x0, -0.5, tol).back();
  const Vec via = integrate_ivp(sys, 1.0, -0.5, mid, 1.5, tol).back();
  CHECK((direct - via).lpNorm<Eigen::Infinity>() <= 10 * tol * (1 + direct.norm()));
}

TEST_CASE("factored propagator survives large horizons") {
  const SystemSpec sys = testing::constant_system((Mat(2, 2) << -1, 0, 0, 1).finished());
  const FactoredPropagator p = factored_transition(sys, 0.0, 0.0, 800.0, 1e-10);
  const auto [core, log_scale] = p.scaled_core();
  CHECK(log_scale == doctest::Approx(800.0).epsilon(1e-8));
  CHECK(core.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
  CHECK(error_kind([&] { p.assemble(); }) == ErrorKind::overflow);
  const Mat small = factored_transition(sys, 0.0, 0.0, 5.0, 1e-10).assemble();
  CHECK(small(1, 1) == doctest::Approx(std::exp(5.0)).epsilon(1e-9));
}

TEST_CASE("propagate_vector matches the transition matrix") {
  const SystemSpec sys = example::example_system({1.0, 2, example::GammaKind::linear});
  Vec v(2);
  v << 1.0, 0.5;
  const std::vector<double> grid{-3, -1, 0, 0.5, 2};
  const auto vals = propagate_vector(sys, 0.7, v, grid, 1e-11);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Vec ref = transition_matrix(sys, 0.7, 0.0, grid[k], 1e-12) * v;
    CHECK((vals[k] - ref).norm() <= 1e-8 * (1 + ref.norm()));
  }
}
