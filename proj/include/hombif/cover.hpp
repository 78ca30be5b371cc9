#pragma once

#include "hombif/evans.hpp"
#include "hombif/system.hpp"

#include <optional>
#include <set>
#include <vector>

namespace hombif {

/// Open hyperbolic intervals J_0..J_m separated by compact gap intervals
/// Jbar_0..Jbar_{m-1}; Jbar_i lies between J_i and J_{i+1}.
struct JCover {
  std::vector<Interval> open;
  std::vector<double> test_points;
  std::vector<int> signs;
  std::vector<Interval> gaps;
  /// Whether the signs on both sides of gap i come from the same alignment
  /// segment (false across non-hyperbolic regions).
  std::vector<bool> certified;
  std::vector<int> pi;
  /// Critical entries at the scan ends that have no hyperbolic interval on
  /// their outer side, so no gap interval can hold them.
  std::vector<Interval> uncovered;

  std::size_t size() const { return gaps.size(); }
  /// Index of the gap interval containing lambda (within slack).
  std::optional<int> gap_containing(double lambda, double slack = 0.0) const;
};

/// Clusters critical entries closer than cluster_tol into gap intervals.
/// Throws Error(no_hyperbolic_window) if no open interval has a nonzero sign.
JCover build_cover(const EvansScan& scan, double cluster_tol);

/// pi_J(i) = (a_{i+1} - a_i) / 2 for consecutive test-point signs. Throws
/// Error(invalid_argument) if a sign is 0.
std::vector<int> j_parity(const JCover& cover);

/// Sum of pi_J over the touched gap indices.
int bifurcation_index(const JCover& cover, const std::set<int>& touched);

}  // namespace hombif
