#include "hombif/cover.hpp"

#include "hombif/error.hpp"

#include <algorithm>
#include <tuple>

namespace hombif {

std::optional<int> JCover::gap_containing(double lambda, double slack) const {
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (lambda >= gaps[i].lo - slack && lambda <= gaps[i].hi + slack) {
      return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

JCover build_cover(const EvansScan& scan, double cluster_tol) {
  if (!(cluster_tol >= 0)) throw Error(ErrorKind::invalid_argument, "cluster_tol must be >= 0");
  if (scan.samples.empty()) throw Error(ErrorKind::no_hyperbolic_window, "empty scan");
  const double lo = scan.lambda_min();
  const double hi = scan.lambda_max();

  std::vector<Interval> clusters;
  for (const auto& c : scan.critical) {
    if (!clusters.empty() && c.where.lo - clusters.back().hi < cluster_tol) {
      clusters.back().hi = std::max(clusters.back().hi, c.where.hi);
    } else {
      clusters.push_back(c.where);
    }
  }

  JCover cover;
  double left = lo;
  for (const auto& g : clusters) {
    if (g.lo <= left) {
      // nothing hyperbolic to the left of this cluster
      cover.uncovered.push_back(g);
      left = std::max(left, g.hi);
      continue;
    }
    cover.open.push_back({left, g.lo});
    cover.gaps.push_back(g);
    left = g.hi;
  }
  if (left < hi) {
    cover.open.push_back({left, hi});
  } else if (!cover.gaps.empty()) {
    cover.uncovered.push_back(cover.gaps.back());
    cover.gaps.pop_back();
  }
  if (cover.open.empty()) {
    throw Error(ErrorKind::no_hyperbolic_window, "no hyperbolic interval in the scan");
  }

  std::vector<int> segments;
  for (const auto& j : cover.open) {
    int sign = 0;
    int seg = -1;
    for (double frac : {0.5, 0.25, 0.75, 0.125, 0.875}) {
      const double x = j.lo + frac * (j.hi - j.lo);
      std::tie(sign, seg) = scan.sign_at(x);
      if (sign != 0) {
        cover.test_points.push_back(x);
        break;
      }
    }
    if (sign == 0) cover.test_points.push_back(j.mid());
    cover.signs.push_back(sign);
    segments.push_back(seg);
  }
  if (std::all_of(cover.signs.begin(), cover.signs.end(), [](int s) { return s == 0; })) {
    throw Error(ErrorKind::no_hyperbolic_window, "E has no nonzero sign on any open interval");
  }
  for (std::size_t i = 0; i < cover.gaps.size(); ++i) {
    cover.certified.push_back(segments[i] >= 0 && segments[i] == segments[i + 1]);
  }
  if (std::none_of(cover.signs.begin(), cover.signs.end(), [](int s) { return s == 0; })) {
    cover.pi = j_parity(cover);
  }
  return cover;
}

std::vector<int> j_parity(const JCover& cover) {
  std::vector<int> pi;
  pi.reserve(cover.gaps.size());
  for (std::size_t i = 0; i + 1 < cover.signs.size(); ++i) {
    const int a = cover.signs[i];
    const int b = cover.signs[i + 1];
    if (a == 0 || b == 0) {
      throw Error(ErrorKind::invalid_argument, "J-parity needs nonzero signs on every J_i");
    }
    pi.push_back((b - a) / 2);
  }
  return pi;
}

int bifurcation_index(const JCover& cover, const std::set<int>& touched) {
  const std::vector<int> pi = cover.pi.size() == cover.gaps.size() ? cover.pi : j_parity(cover);
  int sum = 0;
  for (int i : touched) {
    if (i < 0 || static_cast<std::size_t>(i) >= pi.size()) {
      throw Error(ErrorKind::invalid_argument, "touched index outside the cover");
    }
    sum += pi[static_cast<std::size_t>(i)];
  }
  return sum;
}

}  // namespace hombif
