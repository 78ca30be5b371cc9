#include "hombif/evans.hpp"

#include "hombif/error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>

namespace hombif {

Mat align_basis(const Mat& prev, const Mat& new_subspace, double angle_cap) {
  if (prev.rows() != new_subspace.rows() || prev.cols() != new_subspace.cols()) {
    throw Error(ErrorKind::invalid_argument, "basis shapes differ");
  }
  if (prev.cols() == 0) return new_subspace;
  const double angle = subspace_angle(prev, new_subspace);
  if (angle >= angle_cap) {
    throw Error(ErrorKind::angle_too_large,
                "principal angle " + std::to_string(angle) + " exceeds the alignment cap");
  }
  const Mat projected = new_subspace * (new_subspace.transpose() * prev);
  return orthonormalize(projected, 1e-8);
}

EvansSample evans_from_subspaces(double lambda, const Mat& plus, const Mat& minus,
                                 double zero_tol, const EvansSample* prev,
                                 double angle_cap) {
  if (plus.cols() + minus.cols() != plus.rows()) {
    throw Error(ErrorKind::index_mismatch,
                "r + n = " + std::to_string(plus.cols() + minus.cols()) +
                    " differs from d = " + std::to_string(plus.rows()),
                lambda);
  }
  EvansSample s;
  s.lambda = lambda;
  if (prev != nullptr) {
    s.plus = align_basis(prev->plus, plus, angle_cap);
    s.minus = align_basis(prev->minus, minus, angle_cap);
    s.segment = prev->segment;
  } else {
    s.plus = plus;
    s.minus = minus;
  }
  Mat full(plus.rows(), plus.rows());
  full << s.plus, s.minus;
  s.value = full.determinant();
  s.sign = std::abs(s.value) < zero_tol ? 0 : (s.value > 0 ? 1 : -1);
  return s;
}

namespace {

struct Subspaces {
  std::optional<std::pair<Mat, Mat>> bases;  // empty when not hyperbolic
};

Subspaces compute_subspaces(const SystemSpec& sys, double lambda, const DichotomyOptions& o) {
  try {
    auto plus = stable_subspace_plus(sys, lambda, o);
    auto minus = unstable_subspace_minus(sys, lambda, o);
    return {std::make_pair(std::move(plus.basis), std::move(minus.basis))};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::no_gap) return {};
    throw;
  }
}

int raw_sign(double v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

Mat random_orthogonal(Eigen::Index k, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat g(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) g(i, j) = nd(rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) q.col(0) *= -1.0;
  return q;
}

class Scanner {
 public:
  Scanner(const SystemSpec& sys, const EvansScanOptions& opts)
      : sys_(sys), opts_(opts), rng_(opts.basis_seed) {}

  EvansScan run(const std::vector<double>& grid);

 private:
  // fresh subspaces at lambda, or nullopt when not hyperbolic
  Subspaces subspaces(double lambda) const {
    return compute_subspaces(sys_, lambda, opts_.evans.dichotomy);
  }
  EvansSample start_segment(double lambda, const std::pair<Mat, Mat>& b, int segment);
  // aligned sample at lambda reached from prev, bisecting on large angles
  std::optional<EvansSample> advance(const EvansSample& prev, double lambda,
                                     const std::pair<Mat, Mat>& b, int depth,
                                     std::vector<EvansSample>& inserted);
  EvansSample sample_from(const EvansSample& anchor, double lambda);
  void refine_sign_change(EvansScan& scan, const EvansSample& lo, const EvansSample& hi,
                          std::optional<Interval> plateau);
  void refine_local_minimum(EvansScan& scan, const EvansSample& left,
                            const EvansSample& right);
  void add_touch(EvansScan& scan, Interval where, double min_abs);

  const SystemSpec& sys_;
  const EvansScanOptions& opts_;
  std::mt19937_64 rng_;
};

EvansSample Scanner::start_segment(double lambda, const std::pair<Mat, Mat>& b, int segment) {
  Mat plus = b.first;
  Mat minus = b.second;
  if (opts_.basis_seed != 0) {
    plus = plus * random_orthogonal(plus.cols(), rng_);
    minus = minus * random_orthogonal(minus.cols(), rng_);
  }
  EvansSample s = evans_from_subspaces(lambda, plus, minus, 0.0, nullptr);
  s.segment = segment;
  return s;
}

std::optional<EvansSample> Scanner::advance(const EvansSample& prev, double lambda,
                                            const std::pair<Mat, Mat>& b, int depth,
                                            std::vector<EvansSample>& inserted) {
  try {
    return evans_from_subspaces(lambda, b.first, b.second, 0.0, &prev,
                                opts_.evans.angle_cap);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::angle_too_large) throw;
    if (depth >= opts_.max_depth) {
      throw Error(ErrorKind::angle_too_large,
                  "alignment still fails after " + std::to_string(depth) +
                      " bisections; refine the grid",
                  lambda);
    }
  }
  const double mid = 0.5 * (prev.lambda + lambda);
  const Subspaces ms = subspaces(mid);
  if (!ms.bases) return std::nullopt;
  auto mid_sample = advance(prev, mid, *ms.bases, depth + 1, inserted);
  if (!mid_sample) return std::nullopt;
  inserted.push_back(*mid_sample);
  return advance(*mid_sample, lambda, b, depth + 1, inserted);
}

EvansSample Scanner::sample_from(const EvansSample& anchor, double lambda) {
  const Subspaces s = subspaces(lambda);
  if (!s.bases) {
    throw Error(ErrorKind::no_gap, "lost hyperbolicity while refining", lambda);
  }
  std::vector<EvansSample> inserted;
  auto out = advance(anchor, lambda, *s.bases, 0, inserted);
  if (!out) throw Error(ErrorKind::no_gap, "lost hyperbolicity while refining", lambda);
  return *out;
}

void Scanner::refine_sign_change(EvansScan& scan, const EvansSample& lo_in,
                                 const EvansSample& hi_in, std::optional<Interval> plateau) {
  SignCertificate cert;
  cert.lo = lo_in.lambda;
  cert.hi = hi_in.lambda;
  cert.sign_lo = lo_in.sign;
  cert.sign_hi = hi_in.sign;
  if (plateau) {
    cert.critical = *plateau;
  } else {
    EvansSample lo = lo_in;
    EvansSample hi = hi_in;
    const int s_lo = raw_sign(lo.value);
    while (hi.lambda - lo.lambda > opts_.refine_tol) {
      double mid = 0.5 * (lo.lambda + hi.lambda);
      EvansSample m = sample_from(lo, mid);
      if (m.value == 0.0) {
        // exact zero: probe just beside it to keep a strict bracket
        mid += 0.25 * (hi.lambda - mid);
        m = sample_from(lo, mid);
      }
      if (raw_sign(m.value) == s_lo) {
        lo = m;
      } else {
        hi = m;
      }
      ++cert.bisections;
    }
    cert.critical = {lo.lambda, hi.lambda};
  }
  scan.certificates.push_back(cert);
  scan.critical.push_back({cert.critical, CriticalKind::sign_change});
}

void Scanner::add_touch(EvansScan& scan, Interval where, double min_abs) {
  scan.touch_zeros.push_back({where, min_abs});
  scan.critical.push_back({where, CriticalKind::touch_zero});
}

void Scanner::refine_local_minimum(EvansScan& scan, const EvansSample& left,
                                   const EvansSample& right) {
  auto abs_e = [&](double lambda) {
    const Subspaces s = subspaces(lambda);
    if (!s.bases) return 0.0;
    Mat full(s.bases->first.rows(), s.bases->first.rows());
    full << s.bases->first, s.bases->second;
    return std::abs(full.determinant());
  };
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = left.lambda;
  double b = right.lambda;
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = abs_e(x1);
  double f2 = abs_e(x2);
  // kinked minima need a narrower bracket before |E| drops below zero_abs
  while (b - a > opts_.refine_tol ||
         (std::min(f1, f2) >= scan.zero_abs && b - a > 1e-3 * opts_.refine_tol)) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = abs_e(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = abs_e(x2);
    }
  }
  const double m = f1 < f2 ? x1 : x2;
  const double fm = std::min(f1, f2);
  if (fm >= scan.zero_abs) return;
  const EvansSample at = sample_from(left, m);
  if (raw_sign(at.value) != 0 && raw_sign(at.value) != left.sign) {
    // two sign changes hiding between grid points
    EvansSample l = left;
    EvansSample mid = at;
    mid.sign = raw_sign(at.value);
    refine_sign_change(scan, l, mid, std::nullopt);
    const EvansSample r = sample_from(mid, right.lambda);
    EvansSample rr = r;
    rr.sign = right.sign;
    refine_sign_change(scan, mid, rr, std::nullopt);
    return;
  }
  add_touch(scan, {m, m}, fm);
}

EvansScan Scanner::run(const std::vector<double>& grid) {
  const std::size_t n = grid.size();
  std::vector<Subspaces> subs(n);
  detail::parallel_for(
      n, [&](std::size_t i) { subs[i] = subspaces(grid[i]); }, opts_.parallel);

  EvansScan scan;
  scan.zero_tol = opts_.zero_tol;
  scan.refine_tol = opts_.refine_tol;

  std::vector<std::pair<std::size_t, std::size_t>> gap_runs;  // grid index ranges
  int segment = -1;
  std::optional<EvansSample> prev;
  for (std::size_t i = 0; i < n; ++i) {
    if (!subs[i].bases) {
      if (!gap_runs.empty() && gap_runs.back().second + 1 == i) {
        gap_runs.back().second = i;
      } else {
        gap_runs.emplace_back(i, i);
      }
      prev.reset();
      continue;
    }
    std::optional<EvansSample> s;
    std::vector<EvansSample> inserted;
    if (prev) s = advance(*prev, grid[i], *subs[i].bases, 0, inserted);
    if (!s) {
      s = start_segment(grid[i], *subs[i].bases, ++segment);
      inserted.clear();
    }
    std::sort(inserted.begin(), inserted.end(),
              [](const EvansSample& a, const EvansSample& b) { return a.lambda < b.lambda; });
    for (auto& x : inserted) scan.samples.push_back(std::move(x));
    scan.samples.push_back(*s);
    prev = s;
  }
  if (scan.samples.empty()) {
    throw Error(ErrorKind::no_gap, "no hyperbolic parameter value in the scan window");
  }

  double max_abs = 0.0;
  for (const auto& s : scan.samples) max_abs = std::max(max_abs, std::abs(s.value));
  scan.zero_abs = opts_.zero_tol * max_abs;
  for (auto& s : scan.samples) {
    s.sign = std::abs(s.value) < scan.zero_abs ? 0 : raw_sign(s.value);
  }

  for (const auto& [a, b] : gap_runs) {
    const Interval where{grid[a], grid[b]};
    scan.non_hyperbolic.push_back(where);
    scan.critical.push_back({where, CriticalKind::non_hyperbolic});
  }

  // sign bookkeeping within each segment
  const auto& smp = scan.samples;
  std::size_t i = 0;
  while (i < smp.size()) {
    std::size_t j = i;
    while (j + 1 < smp.size() && smp[j + 1].segment == smp[i].segment) ++j;
    // samples i..j form one segment
    std::size_t k = i;
    while (k <= j) {
      if (smp[k].sign != 0) {
        if (k + 1 <= j && smp[k + 1].sign != 0 && smp[k + 1].sign != smp[k].sign) {
          refine_sign_change(scan, smp[k], smp[k + 1], std::nullopt);
        } else if (k > i && k + 1 <= j && smp[k - 1].sign == smp[k].sign &&
                   smp[k + 1].sign == smp[k].sign &&
                   std::abs(smp[k].value) < std::abs(smp[k - 1].value) &&
                   std::abs(smp[k].value) < std::abs(smp[k + 1].value) &&
                   std::abs(smp[k].value) <= opts_.touch_search_fraction * max_abs) {
          refine_local_minimum(scan, smp[k - 1], smp[k + 1]);
        }
        ++k;
        continue;
      }
      // zero run k..z
      std::size_t z = k;
      while (z + 1 <= j && smp[z + 1].sign == 0) ++z;
      const bool has_left = k > i;
      const bool has_right = z < j;
      double min_abs = std::abs(smp[k].value);
      for (std::size_t q = k; q <= z; ++q) min_abs = std::min(min_abs, std::abs(smp[q].value));
      const Interval run{smp[k].lambda, smp[z].lambda};
      if (has_left && has_right && smp[k - 1].sign != smp[z + 1].sign) {
        refine_sign_change(scan, smp[k - 1], smp[z + 1],
                           z > k ? std::optional<Interval>(run) : std::nullopt);
      } else {
        add_touch(scan, run, min_abs);
      }
      k = z + 1;
    }
    i = j + 1;
  }

  std::sort(scan.critical.begin(), scan.critical.end(),
            [](const CriticalEntry& a, const CriticalEntry& b) {
              return a.where.lo < b.where.lo;
            });
  std::sort(scan.certificates.begin(), scan.certificates.end(),
            [](const SignCertificate& a, const SignCertificate& b) { return a.lo < b.lo; });
  std::sort(scan.touch_zeros.begin(), scan.touch_zeros.end(),
            [](const TouchZero& a, const TouchZero& b) {
              return a.location.lo < b.location.lo;
            });
  return scan;
}

}  // namespace

EvansSample evans_at(const SystemSpec& sys, double lambda, const EvansOptions& opts,
                     const EvansSample* prev) {
  const auto plus = stable_subspace_plus(sys, lambda, opts.dichotomy);
  const auto minus = unstable_subspace_minus(sys, lambda, opts.dichotomy);
  return evans_from_subspaces(lambda, plus.basis, minus.basis, opts.zero_tol, prev,
                              opts.angle_cap);
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  if (!(step > 0) || !(hi > lo)) {
    throw Error(ErrorKind::invalid_argument, "grid needs lo < hi and a positive step");
  }
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n) + 2);
  for (long k = 0; k <= n; ++k) grid.push_back(lo + static_cast<double>(k) * step);
  if (hi - grid.back() > 1e-9 * step) grid.push_back(hi);
  return grid;
}

EvansScan evans_scan(const SystemSpec& sys, const std::vector<double>& grid,
                     const EvansScanOptions& opts) {
  if (grid.size() < 2) throw Error(ErrorKind::invalid_argument, "scan needs at least 2 points");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i - 1] < grid[i])) {
      throw Error(ErrorKind::invalid_argument, "scan grid must be strictly increasing");
    }
  }
  if (!sys.param_interval().contains(grid.front()) ||
      !sys.param_interval().contains(grid.back())) {
    throw Error(ErrorKind::invalid_argument, "scan grid leaves the parameter interval");
  }
  if (!(opts.zero_tol > 0) || !(opts.refine_tol > 0)) {
    throw Error(ErrorKind::invalid_argument, "tolerances must be positive");
  }
  Scanner scanner(sys, opts);
  return scanner.run(grid);
}

std::pair<int, int> EvansScan::sign_at(double lambda) const {
  if (samples.empty() || lambda < lambda_min() || lambda > lambda_max()) return {0, -1};
  const double tol = refine_tol;
  for (const auto& c : critical) {
    if (lambda >= c.where.lo - tol && lambda <= c.where.hi + tol) return {0, -1};
  }
  auto it = std::lower_bound(samples.begin(), samples.end(), lambda,
                             [](const EvansSample& s, double l) { return s.lambda < l; });
  if (it != samples.end() && std::abs(it->lambda - lambda) <= 1e-12 * (1 + std::abs(lambda))) {
    return {it->sign, it->segment};
  }
  if (it == samples.begin()) return {it->sign, it->segment};
  const EvansSample& right = *it;
  const EvansSample& left = *(it - 1);
  if (left.segment != right.segment) return {0, -1};
  for (const auto& c : certificates) {
    if (lambda >= c.lo && lambda <= c.hi) {
      if (lambda < c.critical.lo) return {c.sign_lo, left.segment};
      return {c.sign_hi, left.segment};
    }
  }
  if (left.sign == right.sign) return {left.sign, left.segment};
  if (left.sign == 0) return {right.sign, right.segment};
  if (right.sign == 0) return {left.sign, left.segment};
  return {0, -1};
}

int parity(const EvansScan& scan, double lambda_lo, double lambda_hi) {
  if (!(lambda_lo < lambda_hi)) {
    throw Error(ErrorKind::invalid_argument, "parity needs lambda_lo < lambda_hi");
  }
  if (scan.samples.empty() || lambda_lo < scan.lambda_min() || lambda_hi > scan.lambda_max()) {
    throw Error(ErrorKind::invalid_argument, "parity endpoints outside the scanned range");
  }
  const auto [s_lo, seg_lo] = scan.sign_at(lambda_lo);
  if (s_lo == 0) throw Error(ErrorKind::endpoint_critical, "E vanishes at the left endpoint", lambda_lo);
  const auto [s_hi, seg_hi] = scan.sign_at(lambda_hi);
  if (s_hi == 0) throw Error(ErrorKind::endpoint_critical, "E vanishes at the right endpoint", lambda_hi);
  if (seg_lo != seg_hi) {
    throw Error(ErrorKind::invalid_argument,
                "endpoints lie in different alignment segments; parity not certified");
  }
  return s_lo * s_hi;
}

}  // namespace hombif
