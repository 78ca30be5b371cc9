#pragma once

#include "hombif/cover.hpp"
#include "hombif/dichotomy.hpp"
#include "hombif/linalg.hpp"
#include "hombif/system.hpp"

#include <functional>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

namespace hombif {

/// Mesh on [-T, T], uniform on each piece between switching times, which are
/// always mesh nodes.
std::vector<double> build_mesh(const SystemSpec& sys, double horizon, double step);

/// Nontrivial perturbation y = x - phi_lambda on a mesh.
struct HomoclinicSolution {
  double lambda = 0.0;
  std::vector<double> t;
  Mat y;  ///< d x (M + 1)
  double sup_norm = 0.0;
  double w1inf_norm = 0.0;  ///< max(sup |y|, sup |difference quotients|)
  double residual = 0.0;

  /// Value at the mesh node closest to 0.
  Vec at_zero() const;
};

struct BvpOptions {
  DichotomyOptions dichotomy;
  double mesh_step = 0.01;
  /// Newton stops when the collocation residual (sup norm) drops below
  /// newton_tol * max(1, |y|).
  double newton_tol = 1e-9;
  int max_newton = 40;
  double triviality_floor = 1e-6;
};

/// Unit vector spanning the numerical intersection of the plus and minus
/// subspaces (the principal vector of the smallest principal angle). Throws
/// Error(no_intersection) if that angle exceeds max_angle.
Vec kernel_direction(const SystemSpec& sys, double lambda,
                     const DichotomyOptions& opts = {}, double max_angle = 1e-3);

/// Samples fn on the mesh into a d x (M + 1) matrix.
Mat sample_on_mesh(const std::vector<double>& mesh, int dim,
                   const std::function<Vec(double)>& fn);

/// Damped Newton on the midpoint collocation system with projection boundary
/// conditions at +-T. Throws Error(no_convergence), Error(trivial_collapse),
/// Error(domain_exit).
HomoclinicSolution solve_homoclinic(const SystemSpec& sys, double lambda, const Mat& guess,
                                    const std::vector<double>& mesh,
                                    const BvpOptions& opts = {});

/// Sup norm of the collocation residual of y at lambda (no boundary rows).
double collocation_residual(const SystemSpec& sys, double lambda,
                            const std::vector<double>& mesh, const Mat& y);

enum class EndEvent {
  seed,  ///< branch switching origin on the trivial branch
  returns_to_trivial,
  param_boundary,
  window_exit,
  domain_boundary,
  norm_cap,
  step_limit,
};

std::string_view to_string(EndEvent e);

struct BranchEnd {
  EndEvent event = EndEvent::step_limit;
  double lambda = 0.0;
  std::optional<double> return_lambda;  ///< set for seed / returns_to_trivial
};

/// Ordered branch of nontrivial solutions with the events at both ends.
struct Continuum {
  std::vector<HomoclinicSolution> points;
  BranchEnd first;
  BranchEnd last;
  /// Points where the branch passes through the trivial branch between two
  /// stored solutions (branch switching origins, transcritical crossings).
  std::vector<double> interior_returns;

  bool empty() const { return points.empty(); }
  std::vector<double> return_points() const;
};

struct ContinuationOptions {
  BvpOptions bvp;
  double ds = 0.05;
  double ds_min = 1e-9;
  double ds_max = 1.0;
  double ds_max_rel = 0.25;  ///< step may also grow to this fraction of |(y, lambda)|
  int max_steps = 2000;
  int max_corrector = 8;
  double norm_cap = 1e6;
  std::optional<Interval> window;  ///< defaults to the parameter interval
  double boundary_margin = 1e-3;   ///< distance to the ends of the parameter interval
  double domain_margin = 1e-6;     ///< distance to the state domain boundary
  double return_norm = 1e-4;       ///< sup norm at which a return is declared
  double seed_epsilon = 1e-2;
};

struct Tangent {
  Mat dy;
  double dlambda = 0.0;
};

/// Pseudo-arclength continuation from start. direction = +1 follows
/// increasing lambda at the start (or the given initial tangent's
/// orientation). Throws Error(continuation_stall).
Continuum continue_branch(const SystemSpec& sys, const HomoclinicSolution& start,
                          int direction, const ContinuationOptions& opts = {},
                          const std::optional<Tangent>& initial_tangent = std::nullopt);

/// Continues from start in both directions and joins the halves.
Continuum trace_continuum(const SystemSpec& sys, const HomoclinicSolution& start,
                          const ContinuationOptions& opts = {});

/// Branch switching at a critical value: seeds +-epsilon along the bounded
/// variational solution of kernel_direction and joins both halves into one
/// continuum passing through (phi_lambda*, lambda*).
Continuum switch_branch(const SystemSpec& sys, double lambda_star,
                        const ContinuationOptions& opts = {});

enum class Classification { returns, unbounded, domain_boundary, inconclusive };

std::string_view to_string(Classification c);

struct ContinuumReport {
  Classification classification = Classification::inconclusive;
  std::set<int> touched;
  int index = 0;
  /// False iff the continuum looks bounded but the index is nonzero.
  bool bounded_consistent = true;
  /// Nonzero index: the continuum must be unbounded.
  bool unbounded_certificate = false;
};

/// Throws Error(inconclusive) for an empty continuum.
ContinuumReport classify_continuum(const Continuum& c, const JCover& cover,
                                   double return_slack = 1e-3);

}  // namespace hombif
