#include "hombif/commands.hpp"

#include "hombif/cover.hpp"
#include "hombif/dichotomy.hpp"
#include "hombif/error.hpp"
#include "hombif/evans.hpp"
#include "hombif/example.hpp"
#include "hombif/homoclinic.hpp"
#include "hombif/verify.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace hombif::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::optional<Command> parse_command(std::string_view name) {
  if (name == "scan") return Command::scan;
  if (name == "bifurcations") return Command::bifurcations;
  if (name == "branch") return Command::branch;
  if (name == "classify") return Command::classify;
  if (name == "verify-example") return Command::verify_example;
  if (name == "dichotomy") return Command::dichotomy;
  return std::nullopt;
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::scan: return "scan";
    case Command::bifurcations: return "bifurcations";
    case Command::branch: return "branch";
    case Command::classify: return "classify";
    case Command::verify_example: return "verify-example";
    case Command::dichotomy: return "dichotomy";
  }
  return "scan";
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    written_.push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void manifest(Command c, bool complete) {
    json m;
    m["command"] = to_string(c);
    m["complete"] = complete;
    m["artifacts"] = written_;
    std::ofstream out(dir_ / "MANIFEST.json", std::ios::binary);
    out << m.dump(2) << "\n";
  }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

json interval_json(const Interval& i) { return json::array({i.lo, i.hi}); }

EvansScanOptions scan_options(const RunConfig& cfg) {
  EvansScanOptions o;
  o.evans.dichotomy.horizon = cfg.horizon;
  o.evans.dichotomy.tol = cfg.integration_tol;
  o.evans.dichotomy.gap_threshold = cfg.gap_threshold;
  o.zero_tol = cfg.zero_tol;
  o.refine_tol = cfg.refine_tol;
  o.basis_seed = cfg.seed;
  return o;
}

DichotomyOptions dichotomy_options(const RunConfig& cfg, double horizon) {
  DichotomyOptions o;
  o.horizon = horizon;
  o.tol = cfg.integration_tol;
  o.gap_threshold = cfg.gap_threshold;
  return o;
}

ContinuationOptions continuation_options(const RunConfig& cfg) {
  ContinuationOptions o;
  o.bvp.dichotomy = dichotomy_options(cfg, cfg.bvp_horizon);
  o.bvp.mesh_step = cfg.mesh_step;
  o.bvp.newton_tol = cfg.newton_tol;
  o.bvp.triviality_floor = cfg.triviality_floor;
  o.ds = cfg.branch.ds;
  o.ds_max = cfg.branch.ds_max;
  o.max_steps = cfg.branch.max_steps;
  o.norm_cap = cfg.norm_cap;
  o.seed_epsilon = cfg.branch.epsilon;
  if (cfg.branch.window) {
    o.window = Interval{cfg.branch.window->first, cfg.branch.window->second};
  } else {
    o.window = Interval{cfg.lambda_min, cfg.lambda_max};
  }
  return o;
}

EvansScan run_scan(const SystemSpec& sys, const RunConfig& cfg) {
  return evans_scan(sys, uniform_grid(cfg.lambda_min, cfg.lambda_max, cfg.grid_step), scan_options(cfg));
}

std::string_view kind_name(CriticalKind k) {
  switch (k) {
    case CriticalKind::sign_change: return "sign_change";
    case CriticalKind::touch_zero: return "touch_zero";
    case CriticalKind::non_hyperbolic: return "non_hyperbolic";
  }
  return "sign_change";
}

json critical_json(const EvansScan& scan) {
  json j;
  j["zero_tol"] = scan.zero_tol;
  j["zero_abs"] = scan.zero_abs;
  j["refine_tol"] = scan.refine_tol;
  json list = json::array();
  for (const auto& c : scan.critical) {
    json e;
    e["interval"] = interval_json(c.where);
    e["kind"] = kind_name(c.kind);
    list.push_back(e);
  }
  j["critical"] = list;
  return j;
}

json cover_json(const JCover& cover) {
  json j;
  json open = json::array();
  for (std::size_t i = 0; i < cover.open.size(); ++i) {
    open.push_back({{"interval", interval_json(cover.open[i])},
                    {"test_point", cover.test_points[i]},
                    {"sign", cover.signs[i]}});
  }
  j["open"] = open;
  json gaps = json::array();
  for (std::size_t i = 0; i < cover.gaps.size(); ++i) {
    json g{{"index", i}, {"interval", interval_json(cover.gaps[i])}, {"certified", bool(cover.certified[i])}};
    if (i < cover.pi.size()) g["pi"] = cover.pi[i];
    gaps.push_back(g);
  }
  j["gaps"] = gaps;
  return j;
}

std::string evans_csv(const EvansScan& scan) {
  std::string out = "lambda,E,sign\n";
  for (const auto& s : scan.samples) {
    out += format_number(s.lambda) + "," + format_number(s.value) + "," + std::to_string(s.sign) + "\n";
  }
  return out;
}

int cmd_scan(const SystemSpec& sys, const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  const EvansScan scan = run_scan(sys, cfg);
  art.write("evans.csv", evans_csv(scan));
  art.write_json("critical_values.json", critical_json(scan));
  log << "scan: " << scan.samples.size() << " samples, " << scan.critical.size() << " critical entries\n";
  return ExitCode::ok;
}

int cmd_bifurcations(const SystemSpec& sys, const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  const EvansScan scan = run_scan(sys, cfg);
  json j;
  json certs = json::array();
  for (const auto& c : scan.certificates) {
    certs.push_back({{"bracket", json::array({c.lo, c.hi})},
                     {"critical", interval_json(c.critical)},
                     {"sign_lo", c.sign_lo},
                     {"sign_hi", c.sign_hi},
                     {"bisections", c.bisections}});
  }
  j["certificates"] = certs;
  json touch = json::array();
  for (const auto& t : scan.touch_zeros) {
    touch.push_back({{"location", interval_json(t.location)}, {"min_abs", t.min_abs}});
  }
  j["touch_zeros"] = touch;
  json nh = json::array();
  for (const auto& i : scan.non_hyperbolic) nh.push_back(interval_json(i));
  j["non_hyperbolic"] = nh;

  std::vector<std::pair<double, double>> pairs = cfg.parity_pairs;
  if (pairs.empty()) pairs.emplace_back(cfg.lambda_min, cfg.lambda_max);
  json par = json::array();
  for (const auto& [lo, hi] : pairs) {
    json p{{"lambda_minus", lo}, {"lambda_plus", hi}};
    try {
      p["parity"] = parity(scan, lo, hi);
    } catch (const Error& e) {
      p["error"] = to_string(e.kind());
      p["message"] = e.what();
    }
    par.push_back(p);
  }
  j["parity"] = par;
  try {
    j["cover"] = cover_json(build_cover(scan, cfg.cluster_tol));
  } catch (const Error& e) {
    j["cover"] = {{"error", to_string(e.kind())}, {"message", e.what()}};
  }
  art.write_json("certificates.json", j);
  log << "bifurcations: " << scan.certificates.size() << " certificates, " << scan.touch_zeros.size()
      << " touch-zeros\n";
  return ExitCode::ok;
}

json end_json(const BranchEnd& e) {
  json j{{"event", to_string(e.event)}, {"lambda", e.lambda}};
  if (e.return_lambda) j["return_lambda"] = *e.return_lambda;
  return j;
}

std::string branch_csv(const Continuum& c, int dim) {
  std::string out = "lambda,sup_norm,w1inf_norm";
  for (int i = 1; i <= dim; ++i) out += ",y0_" + std::to_string(i);
  out += ",residual,event\n";
  for (std::size_t k = 0; k < c.points.size(); ++k) {
    const auto& p = c.points[k];
    out += format_number(p.lambda) + "," + format_number(p.sup_norm) + "," + format_number(p.w1inf_norm);
    const Vec y0 = p.at_zero();
    for (int i = 0; i < dim; ++i) out += "," + format_number(y0(i));
    out += "," + format_number(p.residual) + ",";
    if (k == 0) out += to_string(c.first.event);
    else if (k + 1 == c.points.size()) out += to_string(c.last.event);
    out += "\n";
  }
  return out;
}

int cmd_branch(const SystemSpec& sys, const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  const EvansScan scan = run_scan(sys, cfg);
  const JCover cover = build_cover(scan, cfg.cluster_tol);
  const ContinuationOptions opts = continuation_options(cfg);
  Continuum c;
  json seed;
  if (cfg.branch.start_lambda) {
    const double l = *cfg.branch.start_lambda;
    const auto mesh = build_mesh(sys, cfg.bvp_horizon, cfg.mesh_step);
    Vec xi = Vec::Zero(sys.dim());
    xi(0) = *cfg.branch.start_xi1;
    const Mat guess = sample_on_mesh(mesh, sys.dim(), [&](double t) {
      return example::closed_form_solution(cfg.example, l, xi, t);
    });
    const HomoclinicSolution start = solve_homoclinic(sys, l, guess, mesh, opts.bvp);
    c = trace_continuum(sys, start, opts);
    seed = {{"start_lambda", l}, {"start_xi1", *cfg.branch.start_xi1}};
  } else {
    if (scan.certificates.empty()) {
      throw Error(ErrorKind::inconclusive, "no certified sign change in the window to switch from");
    }
    const double target = cfg.branch.seed_lambda.value_or(scan.certificates.front().critical.mid());
    double lambda_star = target;
    double best = 0.1;
    for (const auto& cert : scan.certificates) {
      const double dist = std::abs(cert.critical.mid() - target);
      if (dist <= best) {
        best = dist;
        lambda_star = cert.critical.mid();
      }
    }
    c = switch_branch(sys, lambda_star, opts);
    seed = {{"seed_lambda", lambda_star}};
  }
  const ContinuumReport rep = classify_continuum(c, cover);

  art.write("branch_0.csv", branch_csv(c, sys.dim()));
  json j;
  j["id"] = 0;
  j["system"] = cfg.system;
  j["seed"] = seed;
  j["points"] = c.points.size();
  j["csv"] = "branch_0.csv";
  j["first"] = end_json(c.first);
  j["last"] = end_json(c.last);
  j["interior_returns"] = c.interior_returns;
  j["return_points"] = c.return_points();
  j["classification"] = to_string(rep.classification);
  j["touched"] = rep.touched;
  j["index"] = rep.index;
  j["bounded_consistent"] = rep.bounded_consistent;
  j["unbounded_certificate"] = rep.unbounded_certificate;
  j["cover"] = cover_json(cover);
  art.write_json("continuum.json", j);
  log << "branch: " << c.points.size() << " points, " << to_string(rep.classification) << ", sum pi_J = "
      << rep.index << "\n";
  if (rep.classification == Classification::inconclusive || !rep.bounded_consistent) return ExitCode::inconclusive;
  return ExitCode::ok;
}

int cmd_classify(const SystemSpec& sys, const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  if (cfg.continua.empty()) throw Error(ErrorKind::invalid_argument, "classify needs at least one continuum file");
  const EvansScan scan = run_scan(sys, cfg);
  const JCover cover = build_cover(scan, cfg.cluster_tol);
  json list = json::array();
  bool any_inconclusive = false;
  for (const auto& path : cfg.continua) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::invalid_argument, "cannot read continuum file '" + path + "'");
    json recorded;
    try {
      recorded = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::invalid_argument, "malformed continuum file '" + path + "': " + e.what());
    }
    const std::string cls = recorded.value("classification", "inconclusive");
    std::set<int> touched;
    std::vector<double> returns;
    for (const auto& r : recorded.value("return_points", json::array())) {
      returns.push_back(r.get<double>());
      if (auto i = cover.gap_containing(r.get<double>(), 1e-3)) touched.insert(*i);
    }
    const int index = bifurcation_index(cover, touched);
    const bool consistent = !(cls == "returns" && index != 0);
    any_inconclusive = any_inconclusive || cls == "inconclusive" || !consistent;
    list.push_back({{"source", path},
                    {"classification", cls},
                    {"return_points", returns},
                    {"touched", touched},
                    {"index", index},
                    {"bounded_consistent", consistent},
                    {"unbounded_certificate", index != 0}});
    log << "classify: " << path << ": " << cls << ", sum pi_J = " << index << "\n";
  }
  art.write_json("classification.json", {{"cover", cover_json(cover)}, {"continua", list}});
  return any_inconclusive ? ExitCode::inconclusive : ExitCode::ok;
}

json subspace_json(const SystemSpec& sys, double l, HalfLine h, const DichotomyOptions& o) {
  json j;
  try {
    const auto sub = h == HalfLine::plus ? stable_subspace_plus(sys, l, o) : unstable_subspace_minus(sys, l, o);
    json basis = json::array();
    for (Eigen::Index c = 0; c < sub.basis.cols(); ++c) {
      basis.push_back(std::vector<double>(sub.basis.col(c).data(), sub.basis.col(c).data() + sub.basis.rows()));
    }
    j["rank"] = sub.rank;
    j["basis"] = basis;
    j["gap"] = sub.gap;
    try {
      const auto k = estimate_dichotomy_constants(sys, l, sub, default_sample_grid(h), o.tol);
      j["K"] = k.K;
      j["alpha"] = k.alpha;
      j["fit_residual"] = k.fit_residual;
    } catch (const Error& e) {
      j["constants_error"] = to_string(e.kind());
    }
  } catch (const Error& e) {
    j["error"] = to_string(e.kind());
    j["message"] = e.what();
  }
  return j;
}

int cmd_dichotomy(const SystemSpec& sys, const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  std::vector<double> samples = cfg.dichotomy_samples;
  if (samples.empty()) samples = uniform_grid(cfg.lambda_min, cfg.lambda_max, cfg.grid_step);
  const DichotomyOptions o = dichotomy_options(cfg, cfg.horizon);
  json list = json::array();
  for (double l : samples) {
    json e{{"lambda", l},
           {"plus", subspace_json(sys, l, HalfLine::plus, o)},
           {"minus", subspace_json(sys, l, HalfLine::minus, o)}};
    if (e["plus"].contains("rank") && e["minus"].contains("rank")) {
      e["index"] = e["plus"]["rank"].get<int>() + e["minus"]["rank"].get<int>() - sys.dim();
    }
    list.push_back(e);
  }
  art.write_json("projectors.json", {{"horizon", cfg.horizon}, {"samples", list}});
  log << "dichotomy: " << samples.size() << " samples\n";
  return ExitCode::ok;
}

int cmd_verify(Artifacts& art, std::ostream& log) {
  json list = json::array();
  std::vector<verify::Outcome> all;
  for (int k = 1; k <= 8; ++k) {
    for (auto& o : verify::run_criterion(k)) {
      log << verify::format(o) << std::endl;
      list.push_back({{"criterion", o.criterion},
                      {"label", o.label},
                      {"pass", o.pass},
                      {"known_deviation", o.known_deviation},
                      {"detail", o.detail}});
      all.push_back(std::move(o));
    }
  }
  const bool ok = verify::acceptable(all);
  art.write_json("verification.json", {{"acceptable", ok}, {"outcomes", list}});
  return ok ? ExitCode::ok : ExitCode::numerical;
}

}  // namespace

int run(Command command, const RunConfig& cfg, std::ostream& log) {
  try {
    validate(cfg);
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << "\n";
    return ExitCode::validation;
  }
  Artifacts art(cfg.output);
  try {
    const SystemSpec sys = example::example_system(cfg.example);
    int code = ExitCode::ok;
    switch (command) {
      case Command::scan: code = cmd_scan(sys, cfg, art, log); break;
      case Command::bifurcations: code = cmd_bifurcations(sys, cfg, art, log); break;
      case Command::branch: code = cmd_branch(sys, cfg, art, log); break;
      case Command::classify: code = cmd_classify(sys, cfg, art, log); break;
      case Command::verify_example: code = cmd_verify(art, log); break;
      case Command::dichotomy: code = cmd_dichotomy(sys, cfg, art, log); break;
    }
    art.manifest(command, true);
    return code;
  } catch (const Error& e) {
    json err{{"command", to_string(command)}, {"error", to_string(e.kind())}, {"message", e.what()}};
    if (e.where()) err["lambda"] = *e.where();
    art.write_json("error.json", err);
    art.manifest(command, false);
    log << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::inconclusive ? ExitCode::inconclusive : ExitCode::numerical;
  }
}

}  // namespace hombif::cli
