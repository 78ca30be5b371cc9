#include "hombif/linalg.hpp"

#include "hombif/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hombif {

Mat orthonormalize(const Mat& a, double rank_tol) {
  Mat q = a;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double scale = std::max(a.col(j).norm(), 1e-300);
    // two passes of modified Gram-Schmidt keep orthogonality at roundoff level
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i < j; ++i) {
        q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
      }
    }
    const double nrm = q.col(j).norm();
    if (nrm <= rank_tol * scale || nrm == 0.0) {
      throw Error(ErrorKind::rank_collapse, "orthonormalization lost rank at column " +
                                                std::to_string(j));
    }
    q.col(j) /= nrm;
  }
  return q;
}

Mat orthogonal_complement(const Mat& basis) {
  const Eigen::Index d = basis.rows();
  const Eigen::Index k = basis.cols();
  if (k == 0) return Mat::Identity(d, d);
  if (k == d) return Mat(d, 0);
  Eigen::JacobiSVD<Mat> svd(basis, Eigen::ComputeFullU);
  return svd.matrixU().rightCols(d - k);
}

std::vector<double> principal_angles(const Mat& a, const Mat& b) {
  const Eigen::Index k = std::min(a.cols(), b.cols());
  std::vector<double> out;
  if (k == 0) return out;
  Eigen::JacobiSVD<Mat> svd(a.transpose() * b);
  const Vec s = svd.singularValues();
  out.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    out.push_back(std::acos(std::clamp(s(i), -1.0, 1.0)));
  }
  // acos loses accuracy for tiny angles; recompute those from the sines
  const Mat proj = b - a * (a.transpose() * b);
  Eigen::JacobiSVD<Mat> ssvd(proj);
  const Vec sines = ssvd.singularValues();
  std::vector<double> small(sines.data(), sines.data() + sines.size());
  std::sort(small.begin(), small.end());
  for (Eigen::Index i = 0; i < k && i < static_cast<Eigen::Index>(small.size()); ++i) {
    if (out[static_cast<std::size_t>(i)] < 0.1) {
      out[static_cast<std::size_t>(i)] = std::asin(std::clamp(small[static_cast<std::size_t>(i)], 0.0, 1.0));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double subspace_angle(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) return std::numbers::pi / 2;
  const auto angles = principal_angles(a, b);
  return angles.empty() ? 0.0 : angles.back();
}

}  // namespace hombif
