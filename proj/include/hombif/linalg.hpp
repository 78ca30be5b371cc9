#pragma once

#include <Eigen/Dense>

#include <vector>

namespace hombif {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Orthonormal basis of the column span of `a` (modified Gram-Schmidt, in
/// column order). Throws Error(rank_collapse) if a column becomes negligible.
Mat orthonormalize(const Mat& a, double rank_tol = 1e-12);

/// Orthonormal basis of the orthogonal complement of span(basis).
Mat orthogonal_complement(const Mat& basis);

/// Principal angles between two subspaces given by orthonormal bases,
/// ascending.
std::vector<double> principal_angles(const Mat& a, const Mat& b);

/// Largest principal angle, i.e. the subspace distance in angle form.
double subspace_angle(const Mat& a, const Mat& b);

}  // namespace hombif
