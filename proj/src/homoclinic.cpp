#include "hombif/homoclinic.hpp"

#include "hombif/error.hpp"
#include "hombif/propagator.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <string>

namespace hombif {

std::string_view to_string(EndEvent e) {
  switch (e) {
    case EndEvent::seed: return "seed";
    case EndEvent::returns_to_trivial: return "returns_to_trivial";
    case EndEvent::param_boundary: return "param_boundary";
    case EndEvent::window_exit: return "window_exit";
    case EndEvent::domain_boundary: return "domain_boundary";
    case EndEvent::norm_cap: return "norm_cap";
    case EndEvent::step_limit: return "step_limit";
  }
  return "step_limit";
}

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::returns: return "returns";
    case Classification::unbounded: return "unbounded";
    case Classification::domain_boundary: return "domain_boundary";
    case Classification::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::vector<double> build_mesh(const SystemSpec& sys, double horizon, double step) {
  if (!(horizon > 0) || !(step > 0)) {
    throw Error(ErrorKind::invalid_argument, "mesh needs positive horizon and step");
  }
  std::vector<double> breaks{-horizon};
  for (double s : sys.switching_times_between(-horizon, horizon)) breaks.push_back(s);
  breaks.push_back(horizon);
  std::vector<double> mesh{-horizon};
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p];
    const double b = breaks[p + 1];
    const auto m = std::max<long>(1, static_cast<long>(std::ceil((b - a) / step - 1e-9)));
    for (long k = 1; k < m; ++k) mesh.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(m));
    mesh.push_back(b);
  }
  return mesh;
}

Vec HomoclinicSolution::at_zero() const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (std::abs(t[k]) < std::abs(t[best])) best = k;
  }
  return y.col(static_cast<Eigen::Index>(best));
}

std::vector<double> Continuum::return_points() const {
  std::vector<double> out = interior_returns;
  if (first.return_lambda) out.push_back(*first.return_lambda);
  if (last.return_lambda) out.push_back(*last.return_lambda);
  std::sort(out.begin(), out.end());
  return out;
}

Mat sample_on_mesh(const std::vector<double>& mesh, int dim,
                   const std::function<Vec(double)>& fn) {
  Mat y(dim, static_cast<Eigen::Index>(mesh.size()));
  for (std::size_t k = 0; k < mesh.size(); ++k) y.col(static_cast<Eigen::Index>(k)) = fn(mesh[k]);
  return y;
}

Vec kernel_direction(const SystemSpec& sys, double lambda, const DichotomyOptions& opts,
                     double max_angle) {
  const auto plus = stable_subspace_plus(sys, lambda, opts);
  const auto minus = unstable_subspace_minus(sys, lambda, opts);
  if (plus.rank == 0 || minus.rank == 0) {
    throw Error(ErrorKind::no_intersection, "one of the subspaces is trivial", lambda);
  }
  Eigen::JacobiSVD<Mat> svd(plus.basis.transpose() * minus.basis,
                            Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto angles = principal_angles(plus.basis, minus.basis);
  if (angles.front() > max_angle) {
    throw Error(ErrorKind::no_intersection,
                "smallest principal angle " + std::to_string(angles.front()) +
                    " exceeds " + std::to_string(max_angle),
                lambda);
  }
  Vec v = plus.basis * svd.matrixU().col(0);
  v.normalize();
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0) v = -v;
  return v;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

double sup_norm(const Mat& y) { return y.size() == 0 ? 0.0 : y.cwiseAbs().maxCoeff(); }

// Discrete boundary value problem on a fixed mesh. Unknown ordering is
// y_0, ..., y_M; rows are the left boundary conditions, the collocation
// equations interval by interval, then the right boundary conditions.
class Bvp {
 public:
  Bvp(const SystemSpec& sys, const std::vector<double>& mesh, const BvpOptions& opts)
      : sys_(sys), mesh_(mesh), opts_(opts), d_(sys.dim()),
        nodes_(static_cast<int>(mesh.size())) {
    if (nodes_ < 2) throw Error(ErrorKind::invalid_argument, "mesh needs at least 2 nodes");
    weights_.assign(mesh.size(), 0.0);
    for (std::size_t k = 0; k + 1 < mesh.size(); ++k) {
      const double h = mesh[k + 1] - mesh[k];
      if (!(h > 0)) throw Error(ErrorKind::invalid_argument, "mesh must be increasing");
      weights_[k] += 0.5 * h;
      weights_[k + 1] += 0.5 * h;
    }
  }

  int unknowns() const { return d_ * nodes_; }
  int dim() const { return d_; }
  int nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& mesh() const { return mesh_; }

  double inner(const Mat& a, const Mat& b) const {
    double s = 0.0;
    for (int k = 0; k < nodes_; ++k) s += weights_[static_cast<std::size_t>(k)] * a.col(k).dot(b.col(k));
    return s;
  }

  // rows whose product with y(-T) resp. y(T) must vanish
  const std::pair<Mat, Mat>& boundary(double lambda) {
    if (cached_lambda_ && *cached_lambda_ == lambda) return cached_rows_;
    DichotomyOptions o = opts_.dichotomy;
    o.horizon = -mesh_.front();
    const auto minus = unstable_subspace_minus(sys_, lambda, o);
    o.horizon = mesh_.back();
    const auto plus = stable_subspace_plus(sys_, lambda, o);
    if (plus.rank + minus.rank != d_) {
      throw Error(ErrorKind::index_mismatch,
                  "r + n = " + std::to_string(plus.rank + minus.rank) + " differs from d",
                  lambda);
    }
    cached_rows_ = {minus.far_annihilator.transpose(), plus.far_annihilator.transpose()};
    cached_lambda_ = lambda;
    return cached_rows_;
  }

  Vec g(double t, const Vec& ybar, double lambda) const {
    const Vec phi = sys_.branch(t, lambda);
    return sys_.rhs(t, phi + ybar, lambda) - sys_.rhs(t, phi, lambda);
  }

  Vec residual(const Mat& y, double lambda) {
    const auto& [left, right] = boundary(lambda);
    Vec r(unknowns());
    const auto nl = static_cast<int>(left.rows());
    r.head(nl) = left * y.col(0);
    for (int k = 0; k + 1 < nodes_; ++k) {
      const double h = mesh_[static_cast<std::size_t>(k) + 1] - mesh_[static_cast<std::size_t>(k)];
      const double tm = 0.5 * (mesh_[static_cast<std::size_t>(k) + 1] + mesh_[static_cast<std::size_t>(k)]);
      const Vec ybar = 0.5 * (y.col(k) + y.col(k + 1));
      r.segment(nl + d_ * k, d_) = (y.col(k + 1) - y.col(k)) / h - g(tm, ybar, lambda);
    }
    r.tail(right.rows()) = right * y.col(nodes_ - 1);
    return r;
  }

  // F_lambda by central differences; the boundary rows move with lambda only
  // through the subspaces, an effect of order |y(+-T)|, and are left out.
  Vec d_lambda(const Mat& y, double lambda) {
    const auto nl = static_cast<int>(boundary(lambda).first.rows());
    const double delta = 1e-6 * std::max(1.0, std::abs(lambda));
    Vec r = Vec::Zero(unknowns());
    for (int k = 0; k + 1 < nodes_; ++k) {
      const double tm = 0.5 * (mesh_[static_cast<std::size_t>(k) + 1] + mesh_[static_cast<std::size_t>(k)]);
      const Vec ybar = 0.5 * (y.col(k) + y.col(k + 1));
      r.segment(nl + d_ * k, d_) =
          -(g(tm, ybar, lambda + delta) - g(tm, ybar, lambda - delta)) / (2 * delta);
    }
    return r;
  }

  void jacobian_triplets(const Mat& y, double lambda, std::vector<Triplet>& trip) {
    const auto& [left, right] = boundary(lambda);
    const auto nl = static_cast<int>(left.rows());
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < d_; ++j) trip.emplace_back(i, j, left(i, j));
    for (int k = 0; k + 1 < nodes_; ++k) {
      const double h = mesh_[static_cast<std::size_t>(k) + 1] - mesh_[static_cast<std::size_t>(k)];
      const double tm = 0.5 * (mesh_[static_cast<std::size_t>(k) + 1] + mesh_[static_cast<std::size_t>(k)]);
      const Vec ybar = 0.5 * (y.col(k) + y.col(k + 1));
      const Mat jac = sys_.jacobian(tm, sys_.branch(tm, lambda) + ybar, lambda);
      const int row = nl + d_ * k;
      for (int i = 0; i < d_; ++i) {
        for (int j = 0; j < d_; ++j) {
          const double diag = i == j ? 1.0 / h : 0.0;
          trip.emplace_back(row + i, d_ * k + j, -diag - 0.5 * jac(i, j));
          trip.emplace_back(row + i, d_ * (k + 1) + j, diag - 0.5 * jac(i, j));
        }
      }
    }
    const int row0 = unknowns() - static_cast<int>(right.rows());
    for (int i = 0; i < right.rows(); ++i)
      for (int j = 0; j < d_; ++j) trip.emplace_back(row0 + i, d_ * (nodes_ - 1) + j, right(i, j));
  }

  SpMat jacobian(const Mat& y, double lambda) {
    std::vector<Triplet> trip;
    jacobian_triplets(y, lambda, trip);
    SpMat j(unknowns(), unknowns());
    j.setFromTriplets(trip.begin(), trip.end());
    return j;
  }

  // [F_y F_lambda; (w tau_y)^T tau_lambda]
  SpMat bordered(const Mat& y, double lambda, const Mat& tau_y, double tau_lambda) {
    std::vector<Triplet> trip;
    jacobian_triplets(y, lambda, trip);
    const int n = unknowns();
    const Vec fl = d_lambda(y, lambda);
    for (int i = 0; i < n; ++i) {
      if (fl(i) != 0.0) trip.emplace_back(i, n, fl(i));
    }
    for (int k = 0; k < nodes_; ++k)
      for (int i = 0; i < d_; ++i) {
        const double v = weights_[static_cast<std::size_t>(k)] * tau_y(i, k);
        if (v != 0.0) trip.emplace_back(n, d_ * k + i, v);
      }
    trip.emplace_back(n, n, tau_lambda);
    SpMat j(n + 1, n + 1);
    j.setFromTriplets(trip.begin(), trip.end());
    return j;
  }

  bool inside_domain(const Mat& y, double lambda, double margin) const {
    const auto& dom = sys_.domain();
    for (int k = 0; k < nodes_; ++k) {
      const Vec x = sys_.branch(mesh_[static_cast<std::size_t>(k)], lambda) + y.col(k);
      if (!dom.contains(x) || dom.distance_to_boundary(x) < margin) return false;
    }
    return true;
  }

  double collocation_sup(const Mat& y, double lambda) {
    const Vec r = residual(y, lambda);
    return r.lpNorm<Eigen::Infinity>();
  }

  HomoclinicSolution make_solution(const Mat& y, double lambda, double res) const {
    HomoclinicSolution s;
    s.lambda = lambda;
    s.t = mesh_;
    s.y = y;
    s.sup_norm = sup_norm(y);
    double dmax = 0.0;
    for (int k = 0; k + 1 < nodes_; ++k) {
      const double h = mesh_[static_cast<std::size_t>(k) + 1] - mesh_[static_cast<std::size_t>(k)];
      dmax = std::max(dmax, ((y.col(k + 1) - y.col(k)) / h).lpNorm<Eigen::Infinity>());
    }
    s.w1inf_norm = std::max(s.sup_norm, dmax);
    s.residual = res;
    return s;
  }

  const BvpOptions& options() const { return opts_; }
  const SystemSpec& system() const { return sys_; }

 private:
  const SystemSpec& sys_;
  std::vector<double> mesh_;
  BvpOptions opts_;
  int d_;
  int nodes_;
  std::vector<double> weights_;
  std::optional<double> cached_lambda_;
  std::pair<Mat, Mat> cached_rows_;
};

Mat unflatten(const Vec& v, int d, int nodes) {
  return Eigen::Map<const Mat>(v.data(), d, nodes);
}


bool converged(double res, const Mat& y, double tol) {
  return res <= tol * std::max(1.0, sup_norm(y));
}

// Newton on the pseudo-arclength system F(y, lambda) = 0,
// <tau, (y, lambda) - pred> = 0. Returns the iteration count or -1.
struct CorrectorResult {
  Mat y;
  double lambda = 0.0;
  double residual = 0.0;
  int iterations = -1;
};

CorrectorResult correct(Bvp& bvp, const Mat& y_pred, double lambda_pred, const Mat& tau_y,
                        double tau_lambda, int max_iter) {
  CorrectorResult out;
  Mat y = y_pred;
  double lambda = lambda_pred;
  const int n = bvp.unknowns();
  const double tol = bvp.options().newton_tol;
  auto arc = [&](const Mat& yy, double ll) {
    return bvp.inner(tau_y, yy - y_pred) + tau_lambda * (ll - lambda_pred);
  };
  for (int it = 0; it <= max_iter; ++it) {
    Vec f(n + 1);
    try {
      f.head(n) = bvp.residual(y, lambda);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::no_gap || e.kind() == ErrorKind::index_mismatch) return out;
      throw;
    }
    f(n) = arc(y, lambda);
    const double res = f.head(n).lpNorm<Eigen::Infinity>();
    if (!std::isfinite(res)) return out;
    if (converged(res, y, tol) && std::abs(f(n)) <= tol * std::max(1.0, sup_norm(y))) {
      out.y = y;
      out.lambda = lambda;
      out.residual = res;
      out.iterations = it;
      return out;
    }
    if (it == max_iter) break;
    const SpMat j = bvp.bordered(y, lambda, tau_y, tau_lambda);
    Eigen::SparseLU<SpMat, Eigen::NaturalOrdering<int>> lu;
    lu.compute(j);
    if (lu.info() != Eigen::Success) return out;
    const Vec delta = lu.solve(-f);
    if (lu.info() != Eigen::Success || !delta.allFinite()) return out;
    y += unflatten(delta.head(n), bvp.dim(), bvp.nodes());
    lambda += delta(n);
  }
  return out;
}

Tangent normalize(const Bvp& bvp, Tangent t) {
  const double nrm = std::sqrt(bvp.inner(t.dy, t.dy) + t.dlambda * t.dlambda);
  t.dy /= nrm;
  t.dlambda /= nrm;
  return t;
}

// Tangent of the solution curve at (y, lambda), oriented along ref.
Tangent tangent_at(Bvp& bvp, const Mat& y, double lambda, const Tangent& ref) {
  const int n = bvp.unknowns();
  const SpMat j = bvp.bordered(y, lambda, ref.dy, ref.dlambda);
  Eigen::SparseLU<SpMat, Eigen::NaturalOrdering<int>> lu;
  lu.compute(j);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorKind::continuation_stall, "singular tangent system", lambda);
  }
  Vec rhs = Vec::Zero(n + 1);
  rhs(n) = 1.0;
  const Vec v = lu.solve(rhs);
  if (!v.allFinite()) throw Error(ErrorKind::continuation_stall, "singular tangent system", lambda);
  Tangent t{unflatten(v.head(n), bvp.dim(), bvp.nodes()), v(n)};
  t = normalize(bvp, t);
  if (bvp.inner(t.dy, ref.dy) + t.dlambda * ref.dlambda < 0) {
    t.dy = -t.dy;
    t.dlambda = -t.dlambda;
  }
  return t;
}

}  // namespace

double collocation_residual(const SystemSpec& sys, double lambda,
                            const std::vector<double>& mesh, const Mat& y) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < mesh.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const double h = mesh[k + 1] - mesh[k];
    const double tm = 0.5 * (mesh[k] + mesh[k + 1]);
    const Vec ybar = 0.5 * (y.col(kk) + y.col(kk + 1));
    const Vec phi = sys.branch(tm, lambda);
    const Vec r = (y.col(kk + 1) - y.col(kk)) / h -
                  (sys.rhs(tm, phi + ybar, lambda) - sys.rhs(tm, phi, lambda));
    worst = std::max(worst, r.lpNorm<Eigen::Infinity>());
  }
  return worst;
}

HomoclinicSolution solve_homoclinic(const SystemSpec& sys, double lambda, const Mat& guess,
                                    const std::vector<double>& mesh, const BvpOptions& opts) {
  if (guess.rows() != sys.dim() || guess.cols() != static_cast<Eigen::Index>(mesh.size())) {
    throw Error(ErrorKind::invalid_argument, "guess does not match the mesh");
  }
  Bvp bvp(sys, mesh, opts);
  if (!bvp.inside_domain(guess, lambda, 0.0)) {
    throw Error(ErrorKind::domain_exit, "initial guess leaves the state domain", lambda);
  }
  Mat y = guess;
  Vec f = bvp.residual(y, lambda);
  double res = f.lpNorm<Eigen::Infinity>();
  for (int it = 0;; ++it) {
    if (converged(res, y, opts.newton_tol)) break;
    if (it >= opts.max_newton) {
      throw Error(ErrorKind::no_convergence,
                  "Newton did not converge, residual " + std::to_string(res), lambda);
    }
    Eigen::SparseLU<SpMat, Eigen::NaturalOrdering<int>> lu;
    lu.compute(bvp.jacobian(y, lambda));
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorKind::no_convergence, "singular Newton matrix", lambda);
    }
    const Vec delta = lu.solve(-f);
    if (!delta.allFinite()) throw Error(ErrorKind::no_convergence, "singular Newton matrix", lambda);
    const Mat dy = unflatten(delta, sys.dim(), static_cast<int>(mesh.size()));
    double theta = 1.0;
    bool accepted = false;
    while (theta >= 1.0 / 256) {
      const Mat trial = y + theta * dy;
      if (bvp.inside_domain(trial, lambda, 0.0)) {
        const Vec ft = bvp.residual(trial, lambda);
        const double rt = ft.lpNorm<Eigen::Infinity>();
        if (std::isfinite(rt) && rt < (1.0 - 0.25 * theta) * res) {
          y = trial;
          f = ft;
          res = rt;
          accepted = true;
          break;
        }
      }
      theta *= 0.5;
    }
    if (!accepted) {
      // a full step that barely changes y means we sit at roundoff level
      if (sup_norm(dy) <= 1e-3 * opts.newton_tol * std::max(1.0, sup_norm(y))) break;
      throw Error(ErrorKind::no_convergence,
                  "damped Newton stalled at residual " + std::to_string(res), lambda);
    }
  }
  if (!bvp.inside_domain(y, lambda, 0.0)) {
    throw Error(ErrorKind::domain_exit, "solution leaves the state domain", lambda);
  }
  if (sup_norm(y) <= opts.triviality_floor) {
    throw Error(ErrorKind::trivial_collapse, "Newton converged to the prescribed branch", lambda);
  }
  return bvp.make_solution(y, lambda, res);
}

namespace {

struct HalfBranch {
  std::vector<HomoclinicSolution> points;
  BranchEnd end;
  std::vector<double> interior_returns;
};

HalfBranch run_continuation(Bvp& bvp, const HomoclinicSolution& start, Tangent tau,
                            const ContinuationOptions& opts) {
  const SystemSpec& sys = bvp.system();
  const Interval lam = sys.param_interval();
  const Interval window = opts.window.value_or(lam);
  HalfBranch out;
  out.points.push_back(start);
  double ds = opts.ds;
  bool approaching = false;
  int steps = 0;

  auto finish = [&](EndEvent e, double lambda, std::optional<double> ret = std::nullopt) {
    out.end = {e, lambda, ret};
    return out;
  };

  while (true) {
    const HomoclinicSolution& cur = out.points.back();
    if (steps >= opts.max_steps) return finish(EndEvent::step_limit, cur.lambda);
    if (out.points.size() >= 2) {
      const HomoclinicSolution& prev = out.points[out.points.size() - 2];
      Tangent sec{cur.y - prev.y, cur.lambda - prev.lambda};
      const double nrm = std::sqrt(bvp.inner(sec.dy, sec.dy) + sec.dlambda * sec.dlambda);
      if (nrm > 0) tau = normalize(bvp, sec);
    }
    const double znorm = std::sqrt(bvp.inner(cur.y, cur.y) + cur.lambda * cur.lambda);
    const double ds_cap = std::max(opts.ds_max, opts.ds_max_rel * znorm);
    ds = std::min(ds, ds_cap);

    const Mat y_pred = cur.y + ds * tau.dy;
    const double l_pred = cur.lambda + ds * tau.dlambda;
    const CorrectorResult c = correct(bvp, y_pred, l_pred, tau.dy, tau.dlambda, opts.max_corrector);

    auto reject = [&]() {
      ds *= 0.5;
      if (ds < opts.ds_min) {
        throw Error(ErrorKind::continuation_stall,
                    "continuation step underflow without an endpoint event", cur.lambda);
      }
    };
    if (c.iterations < 0) {
      reject();
      continue;
    }
    const Mat dzy = c.y - cur.y;
    const double dist = std::sqrt(bvp.inner(dzy, dzy) + (c.lambda - cur.lambda) * (c.lambda - cur.lambda));
    if (dist > 2.0 * ds) {
      reject();
      continue;
    }
    if (!lam.contains(c.lambda)) {
      reject();
      continue;
    }
    ++steps;
    const double sup = sup_norm(c.y);
    const bool crossed = bvp.inner(c.y, cur.y) < 0;

    if (sup <= opts.return_norm || crossed) {
      const double cur_sup = sup_norm(cur.y);
      if (cur_sup <= opts.return_norm || ds < 1e3 * opts.ds_min) {
        const double at = sup <= opts.return_norm && std::abs(c.lambda - cur.lambda) <= ds ? c.lambda
                                                                                            : cur.lambda;
        return finish(EndEvent::returns_to_trivial, at, at);
      }
      // step back and approach the trivial branch with shorter steps
      approaching = true;
      ds *= 0.5;
      continue;
    }
    if (!bvp.inside_domain(c.y, c.lambda, opts.domain_margin)) {
      return finish(EndEvent::domain_boundary, c.lambda);
    }
    if (!window.contains(c.lambda) && lam.contains(c.lambda) &&
        !(c.lambda - lam.lo <= opts.boundary_margin || lam.hi - c.lambda <= opts.boundary_margin)) {
      return finish(EndEvent::window_exit, c.lambda);
    }
    out.points.push_back(bvp.make_solution(c.y, c.lambda, c.residual));
    if (c.lambda - lam.lo <= opts.boundary_margin || lam.hi - c.lambda <= opts.boundary_margin) {
      return finish(EndEvent::param_boundary, c.lambda);
    }
    if (sup > opts.norm_cap) return finish(EndEvent::norm_cap, c.lambda);
    if (!approaching) {
      if (c.iterations <= 3) {
        ds *= 1.5;
      } else if (c.iterations >= 6) {
        ds *= 0.7;
      }
    }
  }
}

Continuum join(HalfBranch backward, HalfBranch forward, std::vector<double> interior) {
  Continuum c;
  std::reverse(backward.points.begin(), backward.points.end());
  c.points = std::move(backward.points);
  c.points.insert(c.points.end(), forward.points.begin(), forward.points.end());
  c.first = backward.end;
  c.last = forward.end;
  c.interior_returns = std::move(interior);
  for (double r : backward.interior_returns) c.interior_returns.push_back(r);
  for (double r : forward.interior_returns) c.interior_returns.push_back(r);
  std::sort(c.interior_returns.begin(), c.interior_returns.end());
  return c;
}

Tangent oriented_start_tangent(Bvp& bvp, const HomoclinicSolution& start, int direction) {
  Tangent ref{Mat::Zero(bvp.dim(), bvp.nodes()), direction >= 0 ? 1.0 : -1.0};
  return tangent_at(bvp, start.y, start.lambda, ref);
}

}  // namespace

Continuum continue_branch(const SystemSpec& sys, const HomoclinicSolution& start,
                          int direction, const ContinuationOptions& opts,
                          const std::optional<Tangent>& initial_tangent) {
  Bvp bvp(sys, start.t, opts.bvp);
  Tangent tau = initial_tangent ? normalize(bvp, *initial_tangent)
                                : oriented_start_tangent(bvp, start, direction);
  HalfBranch half = run_continuation(bvp, start, tau, opts);
  Continuum c;
  c.points = std::move(half.points);
  c.first = {EndEvent::step_limit, start.lambda, std::nullopt};
  c.first.event = EndEvent::seed;
  c.last = half.end;
  c.interior_returns = std::move(half.interior_returns);
  return c;
}

Continuum trace_continuum(const SystemSpec& sys, const HomoclinicSolution& start,
                          const ContinuationOptions& opts) {
  Bvp bvp(sys, start.t, opts.bvp);
  const Tangent tau = oriented_start_tangent(bvp, start, +1);
  HalfBranch fwd = run_continuation(bvp, start, tau, opts);
  HalfBranch bwd = run_continuation(bvp, start, Tangent{-tau.dy, -tau.dlambda}, opts);
  bwd.points.erase(bwd.points.begin());
  return join(std::move(bwd), std::move(fwd), {});
}

Continuum switch_branch(const SystemSpec& sys, double lambda_star,
                        const ContinuationOptions& opts) {
  const Vec v0 = kernel_direction(sys, lambda_star, opts.bvp.dichotomy);
  const std::vector<double> mesh = build_mesh(sys, opts.bvp.dichotomy.horizon, opts.bvp.mesh_step);

  double alpha = 1.0;
  try {
    const auto plus = stable_subspace_plus(sys, lambda_star, opts.bvp.dichotomy);
    alpha = estimate_dichotomy_constants(sys, lambda_star, plus,
                                         default_sample_grid(HalfLine::plus, 4.0),
                                         opts.bvp.dichotomy.tol)
                .alpha;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::non_decay) throw;
  }
  const std::vector<Vec> flow = propagate_vector(sys, lambda_star, v0, mesh, opts.bvp.dichotomy.tol);
  Mat seed(sys.dim(), static_cast<Eigen::Index>(mesh.size()));
  for (std::size_t k = 0; k < mesh.size(); ++k) {
    seed.col(static_cast<Eigen::Index>(k)) = flow[k] * std::exp(-alpha * std::abs(mesh[k]));
  }
  seed /= sup_norm(seed);

  Bvp bvp(sys, mesh, opts.bvp);
  const double seed_norm = std::sqrt(bvp.inner(seed, seed));
  const Mat tau_y = seed / seed_norm;
  std::vector<HalfBranch> halves;
  for (const double sigma : {1.0, -1.0}) {
    const Mat y_pred = sigma * opts.seed_epsilon * seed;
    const CorrectorResult c =
        correct(bvp, y_pred, lambda_star, tau_y, 0.0, 4 * opts.max_corrector);
    if (c.iterations < 0) {
      throw Error(ErrorKind::no_convergence, "branch switching corrector failed", lambda_star);
    }
    if (sup_norm(c.y) <= opts.bvp.triviality_floor) {
      throw Error(ErrorKind::trivial_collapse, "branch switching collapsed to the trivial branch",
                  lambda_star);
    }
    const HomoclinicSolution start = bvp.make_solution(c.y, c.lambda, c.residual);
    const Tangent ref{sigma * tau_y, 0.0};
    const Tangent tau = tangent_at(bvp, start.y, start.lambda, ref);
    halves.push_back(run_continuation(bvp, start, tau, opts));
  }
  return join(std::move(halves[1]), std::move(halves[0]), {lambda_star});
}

ContinuumReport classify_continuum(const Continuum& c, const JCover& cover, double return_slack) {
  if (c.empty()) throw Error(ErrorKind::inconclusive, "empty continuum");
  std::size_t imin = 0;
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    if (c.points[k].sup_norm < c.points[imin].sup_norm) imin = k;
  }
  double front_max = 0.0;
  double back_max = 0.0;
  for (std::size_t k = 0; k < c.points.size(); ++k) {
    if (k <= imin) front_max = std::max(front_max, c.points[k].sup_norm);
    if (k >= imin) back_max = std::max(back_max, c.points[k].sup_norm);
  }
  const double floor_norm = c.points[imin].sup_norm;

  enum class Kind { unbounded, boundary, returns, unknown };
  auto kind_of = [&](const BranchEnd& e, const HomoclinicSolution& end_point, double half_max) {
    switch (e.event) {
      case EndEvent::norm_cap: return Kind::unbounded;
      case EndEvent::window_exit:
        // growing norm toward a window edge counts as evidence of unboundedness
        return end_point.sup_norm >= 0.99 * half_max && end_point.sup_norm > floor_norm
                   ? Kind::unbounded
                   : Kind::unknown;
      case EndEvent::param_boundary:
      case EndEvent::domain_boundary: return Kind::boundary;
      case EndEvent::returns_to_trivial: return Kind::returns;
      case EndEvent::seed:
      case EndEvent::step_limit: return Kind::unknown;
    }
    return Kind::unknown;
  };
  const Kind a = kind_of(c.first, c.points.front(), front_max);
  const Kind b = kind_of(c.last, c.points.back(), back_max);

  ContinuumReport rep;
  if (a == Kind::unbounded || b == Kind::unbounded) {
    rep.classification = Classification::unbounded;
  } else if (a == Kind::boundary || b == Kind::boundary) {
    rep.classification = Classification::domain_boundary;
  } else if (a == Kind::returns && b == Kind::returns) {
    rep.classification = Classification::returns;
  } else {
    rep.classification = Classification::inconclusive;
  }
  for (double r : c.return_points()) {
    if (auto i = cover.gap_containing(r, return_slack)) rep.touched.insert(*i);
  }
  rep.index = bifurcation_index(cover, rep.touched);
  rep.unbounded_certificate = rep.index != 0;
  rep.bounded_consistent = !(rep.classification == Classification::returns && rep.index != 0);
  return rep;
}

}  // namespace hombif
