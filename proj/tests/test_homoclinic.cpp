#include "support.hpp"

#include "hombif/example.hpp"
#include "hombif/homoclinic.hpp"

#include <doctest.h>

using namespace hombif;
using testing::error_kind;

namespace {

const example::ExampleConfig linear_cfg{1.0, 2, example::GammaKind::linear};

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Mat closed_form_guess(const example::ExampleConfig& cfg, double l, double xi1,
                      const std::vector<double>& mesh) {
  return sample_on_mesh(mesh, 2, [&](double t) { return example::closed_form_solution(cfg, l, vec2(xi1, 0), t); });
}

HomoclinicSolution point(double lambda, double sup) {
  HomoclinicSolution s;
  s.lambda = lambda;
  s.t = {-1, 0, 1};
  s.y = Mat::Zero(2, 3);
  s.sup_norm = sup;
  return s;
}

JCover two_sided_cover() {
  JCover c;
  c.open = {{-2, -0.1}, {0.1, 2}};
  c.test_points = {-1, 1};
  c.signs = {1, -1};
  c.gaps = {{-0.1, 0.1}};
  c.certified = {true};
  c.pi = j_parity(c);
  return c;
}

}  // namespace

TEST_CASE("mesh contains the switching time") {
  const SystemSpec sys = example::example_system(linear_cfg);
  const auto mesh = build_mesh(sys, 2.0, 0.3);
  CHECK(mesh.front() == -2.0);
  CHECK(mesh.back() == 2.0);
  CHECK(std::find(mesh.begin(), mesh.end(), 0.0) != mesh.end());
  for (std::size_t k = 1; k < mesh.size(); ++k) {
    CHECK(mesh[k] > mesh[k - 1]);
    CHECK(mesh[k] - mesh[k - 1] <= 0.3 + 1e-12);
  }
}

TEST_CASE("kernel direction") {
  const SystemSpec sys = example::example_system(linear_cfg);
  const Vec v = kernel_direction(sys, 0.0);
  CHECK(std::abs(std::abs(v(0)) - 1.0) <= 1e-8);
  CHECK(std::abs(v(1)) <= 1e-8);
  CHECK(error_kind([&] { kernel_direction(sys, 1.0); }) == ErrorKind::no_intersection);
}

TEST_CASE("homoclinic solution of the example") {
  const SystemSpec sys = example::example_system(linear_cfg);
  const double l = -0.5;
  const auto mesh = build_mesh(sys, 20.0, 0.01);
  const HomoclinicSolution s = solve_homoclinic(sys, l, closed_form_guess(linear_cfg, l, 0.6, mesh), mesh);
  const double scale = std::max(1.0, s.sup_norm);
  CHECK((s.at_zero() - vec2(0.75, 0)).norm() <= 1e-3);
  CHECK(s.residual <= 1e-9 * scale);
  CHECK(s.y.col(0).norm() <= 1e-6);
  CHECK(s.y.col(s.y.cols() - 1).norm() <= 1e-6);
  double worst = 0;
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    worst = std::max(worst, (s.y.col(Eigen::Index(k)) - testing::planar_solution(1.0, 2, l, 0.75, 0.0, mesh[k])).norm());
  }
  CHECK(worst <= 1e-3 * scale);

  // refined mesh: collocation residual of the interpolated solution is small
  std::vector<double> fine;
  for (std::size_t k = 0; k + 1 < mesh.size(); ++k) {
    fine.push_back(mesh[k]);
    fine.push_back(0.5 * (mesh[k] + mesh[k + 1]));
  }
  fine.push_back(mesh.back());
  const Mat yf = sample_on_mesh(fine, 2, [&](double t) { return testing::planar_solution(1.0, 2, l, 0.75, 0.0, t); });
  CHECK(collocation_residual(sys, l, fine, yf) <= 1e-3);
}

TEST_CASE("zero guess collapses to the trivial branch") {
  const SystemSpec sys = example::example_system(linear_cfg);
  const auto mesh = build_mesh(sys, 20.0, 0.02);
  CHECK(error_kind([&] { solve_homoclinic(sys, -0.5, Mat::Zero(2, Eigen::Index(mesh.size())), mesh); }) ==
        ErrorKind::trivial_collapse);
}

TEST_CASE("odd nonlinearity: mirrored solution") {
  const example::ExampleConfig cfg{-1.0, 3, example::GammaKind::sin};
  const SystemSpec sys = example::example_system(cfg);
  const auto mesh = build_mesh(sys, 20.0, 0.02);
  const double l = 1.0;
  const double r = example::homoclinic_initial_conditions(cfg, l).back();
  BvpOptions o;
  o.mesh_step = 0.02;
  const HomoclinicSolution a = solve_homoclinic(sys, l, closed_form_guess(cfg, l, r, mesh), mesh, o);
  const HomoclinicSolution b = solve_homoclinic(sys, l, -a.y, mesh, o);
  CHECK((a.y + b.y).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, a.sup_norm));
}

TEST_CASE("continuation stops at the norm cap") {
  const SystemSpec sys = example::example_system(linear_cfg);
  ContinuationOptions o;
  o.bvp.mesh_step = 0.02;
  o.norm_cap = 2.0;
  const auto mesh = build_mesh(sys, 20.0, o.bvp.mesh_step);
  const HomoclinicSolution s = solve_homoclinic(sys, -0.5, closed_form_guess(linear_cfg, -0.5, 0.75, mesh), mesh, o.bvp);
  const Continuum c = continue_branch(sys, s, -1, o);
  CHECK(c.last.event == EndEvent::norm_cap);
  REQUIRE(c.points.size() >= 2);
  CHECK(c.points.back().sup_norm > 2.0);
  CHECK(c.points[c.points.size() - 2].sup_norm <= 2.0);
  for (const auto& p : c.points) {
    const double xi1 = p.at_zero()(0);
    CHECK(xi1 == doctest::Approx(-1.5 * p.lambda).epsilon(1e-3));
  }
}

TEST_CASE("branch switching from the transcritical point") {
  const SystemSpec sys = example::example_system(linear_cfg);
  ContinuationOptions o;
  o.bvp.mesh_step = 0.02;
  o.window = Interval{-1.0, 1.0};
  const Continuum c = switch_branch(sys, 0.0, o);
  REQUIRE(c.points.size() > 4);
  CHECK(c.first.event == EndEvent::window_exit);
  CHECK(c.last.event == EndEvent::window_exit);
  CHECK(c.points.front().lambda * c.points.back().lambda < 0);
  REQUIRE(c.interior_returns.size() == 1);
  CHECK(std::abs(c.interior_returns[0]) <= 1e-6);
  const auto ret = c.return_points();
  CHECK(std::find(ret.begin(), ret.end(), c.interior_returns[0]) != ret.end());
  const ContinuumReport rep = classify_continuum(c, two_sided_cover());
  CHECK(rep.classification == Classification::unbounded);
  CHECK(rep.index == -1);
  CHECK(rep.unbounded_certificate);
}

TEST_CASE("classification of end events") {
  const JCover cover = two_sided_cover();
  CHECK(error_kind([&] { classify_continuum(Continuum{}, cover); }) == ErrorKind::inconclusive);

  Continuum c;
  c.points = {point(-0.05, 1e-5), point(0.5, 1.0), point(1.0, 2.0)};
  c.first = {EndEvent::returns_to_trivial, -0.05, -0.05};
  c.last = {EndEvent::returns_to_trivial, 1.0, 1.0};
  auto rep = classify_continuum(c, cover);
  CHECK(rep.classification == Classification::returns);
  CHECK(rep.touched == std::set<int>{0});
  CHECK(rep.index == -1);
  CHECK(!rep.bounded_consistent);
  CHECK(rep.unbounded_certificate);

  c.last = {EndEvent::norm_cap, 1.0, std::nullopt};
  CHECK(classify_continuum(c, cover).classification == Classification::unbounded);
  c.last = {EndEvent::param_boundary, 1.0, std::nullopt};
  CHECK(classify_continuum(c, cover).classification == Classification::domain_boundary);
  c.last = {EndEvent::domain_boundary, 1.0, std::nullopt};
  CHECK(classify_continuum(c, cover).classification == Classification::domain_boundary);
  c.last = {EndEvent::step_limit, 1.0, std::nullopt};
  rep = classify_continuum(c, cover);
  CHECK(rep.classification == Classification::inconclusive);
  CHECK(rep.bounded_consistent);

  // window exit counts only with a growing norm
  c.last = {EndEvent::window_exit, 1.0, std::nullopt};
  CHECK(classify_continuum(c, cover).classification == Classification::unbounded);
  c.points.back().sup_norm = 0.5;
  CHECK(classify_continuum(c, cover).classification == Classification::inconclusive);

  // a return far from every gap touches nothing
  c.points = {point(1.5, 1e-5), point(1.2, 1.0)};
  c.first = {EndEvent::returns_to_trivial, 1.5, 1.5};
  c.last = {EndEvent::returns_to_trivial, 1.2, 1.2};
  rep = classify_continuum(c, cover);
  CHECK(rep.touched.empty());
  CHECK(rep.index == 0);
  CHECK(rep.bounded_consistent);
}

TEST_CASE("names") {
  CHECK(to_string(EndEvent::returns_to_trivial) == "returns_to_trivial");
  CHECK(to_string(Classification::domain_boundary) == "domain_boundary");
}
