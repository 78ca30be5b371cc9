#include "hombif/commands.hpp"
#include "hombif/config.hpp"
#include "hombif/evans.hpp"
#include "hombif/example.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hombif;
using namespace hombif::cli;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "hombif-cli-tests" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

RunConfig config(const std::string& yaml, const fs::path& out) {
  RunConfig cfg = parse_config_text(yaml);
  cfg.output = out.string();
  return cfg;
}

int run_quiet(Command c, const RunConfig& cfg) {
  std::ostringstream log;
  return run(c, cfg, log);
}

template <class E, class F>
E caught(F&& f) {
  try {
    f();
  } catch (const E& e) {
    return e;
  }
  FAIL("expected exception");
  throw;
}

}  // namespace

TEST_CASE("minimal config takes the defaults") {
  const RunConfig cfg = parse_config_text("system: example-sin\nlambda: [-7, 7]\n");
  CHECK(cfg.example.kind == example::GammaKind::sin);
  CHECK(cfg.lambda_min == -7);
  CHECK(cfg.lambda_max == 7);
  CHECK(cfg.grid_step == 0.05);
  CHECK(cfg.horizon == 20.0);
  CHECK(cfg.example.beta == 1.0);
  CHECK(cfg.example.n == 2);
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("validation lists every violation") {
  RunConfig cfg = parse_config_text("system: example-linear\nbeta: 0\nn: 1\ngrid_step: -0.1\n");
  const auto e = caught<ValidationError>([&] { validate(cfg); });
  CHECK(e.violations().size() >= 3);

  const RunConfig tan = parse_config_text("system: example-tan\nlambda: [-2, 2]\n");
  CHECK(!caught<ValidationError>([&] { validate(tan); }).violations().empty());

  const RunConfig half = parse_config_text("branch:\n  start_lambda: 0.5\n");
  CHECK(caught<ValidationError>([&] { validate(half); }).violations().size() == 1);

  const RunConfig unknown = parse_config_text("system: example-cos\n");
  CHECK(!caught<ValidationError>([&] { validate(unknown); }).violations().empty());
}

TEST_CASE("parse errors carry line and key") {
  const auto e = caught<ParseError>([] { parse_config_text("system: example-linear\nbeta: 1\nlamda: [0, 1]\n"); });
  CHECK(e.line() == 3);
  CHECK(e.key() == "lamda");
  const auto nested = caught<ParseError>([] { parse_config_text("branch:\n  ds: 0.1\n  dss: 0.2\n"); });
  CHECK(nested.line() == 3);
  CHECK(nested.key().find("dss") != std::string::npos);
  CHECK_THROWS_AS(parse_config_text("lambda: [0, 1\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("beta: one\n"), ParseError);
  CHECK_THROWS_AS(parse_config_text("lambda: 3\n"), ParseError);
}

TEST_CASE("command names") {
  CHECK(parse_command("verify-example") == Command::verify_example);
  CHECK(to_string(Command::bifurcations) == "bifurcations");
  CHECK(!parse_command("plot"));
  CHECK(format_number(0.1) == "0.10000000000000001");
}

TEST_CASE("scan writes the Evans table") {
  const fs::path out = scratch("scan");
  const RunConfig cfg = config("system: example-linear\nlambda: [-2, 2]\n", out);
  REQUIRE(run_quiet(Command::scan, cfg) == ExitCode::ok);
  const std::string csv = slurp(out / "evans.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 82);
  CHECK(csv.find('\r') == std::string::npos);
  const json crit = load(out / "critical_values.json");
  const json manifest = load(out / "MANIFEST.json");
  CHECK(manifest["complete"] == true);
  CHECK(manifest["command"] == "scan");

  // rerun is byte identical
  const RunConfig again = config("system: example-linear\nlambda: [-2, 2]\n", scratch("scan-again"));
  REQUIRE(run_quiet(Command::scan, again) == ExitCode::ok);
  CHECK(slurp(fs::path(again.output) / "evans.csv") == csv);
  CHECK(slurp(fs::path(again.output) / "critical_values.json") == slurp(out / "critical_values.json"));
  CHECK(crit.dump().find("sign_change") != std::string::npos);
}

TEST_CASE("certificates reproduce from their brackets") {
  const fs::path out = scratch("bif");
  const RunConfig cfg = config("system: example-sin\nn: 3\nlambda: [-4, 4]\n", out);
  REQUIRE(run_quiet(Command::bifurcations, cfg) == ExitCode::ok);
  const json j = load(out / "certificates.json");
  REQUIRE(j["certificates"].size() == 3);
  const SystemSpec sys = example::example_system(cfg.example);
  for (const auto& c : j["certificates"]) {
    const double lo = c["critical"][0];
    const double hi = c["critical"][1];
    const EvansSample a = evans_at(sys, lo);
    const EvansSample b = evans_at(sys, hi, {}, &a);
    CHECK(a.sign * b.sign == -1);
  }
}

TEST_CASE("parity over a touch-zero") {
  const fs::path out = scratch("abs");
  const RunConfig cfg = config("system: example-abs\nlambda: [-2, 2]\nparity: [[-1, 1]]\n", out);
  REQUIRE(run_quiet(Command::bifurcations, cfg) == ExitCode::ok);
  const json j = load(out / "certificates.json");
  CHECK(j["certificates"].empty());
  CHECK(j["touch_zeros"].size() == 1);
  REQUIRE(j["parity"].size() == 1);
  CHECK(j["parity"][0]["parity"] == 1);
}

TEST_CASE("branch and classify") {
  const fs::path out = scratch("branch");
  const RunConfig cfg =
      config("system: example-linear\nlambda: [-2, 2]\nmesh_step: 0.02\nbranch:\n  window: [-1, 1]\n", out);
  REQUIRE(run_quiet(Command::branch, cfg) == ExitCode::ok);
  const json c = load(out / "continuum.json");
  CHECK(c["classification"] == "unbounded");
  CHECK(c["index"] == -1);
  CHECK(fs::exists(out / "branch_0.csv"));

  const fs::path cls = scratch("classify");
  RunConfig ccfg = config("system: example-linear\nlambda: [-2, 2]\n", cls);
  ccfg.continua = {(out / "continuum.json").string()};
  REQUIRE(run_quiet(Command::classify, ccfg) == ExitCode::ok);
  const json r = load(cls / "classification.json");
  CHECK(r["continua"][0]["index"] == -1);
  CHECK(r["continua"][0]["classification"] == "unbounded");
}

TEST_CASE("error exits") {
  const fs::path none = scratch("no-cert");
  CHECK(run_quiet(Command::branch, config("system: example-abs\nlambda: [-2, 2]\n", none)) == ExitCode::inconclusive);
  CHECK(load(none / "MANIFEST.json")["complete"] == false);
  CHECK(load(none / "error.json")["error"] == "Inconclusive");

  const fs::path collapse = scratch("collapse");
  const RunConfig cfg = config(
      "system: example-sin\nn: 3\nlambda: [-1, 4]\nmesh_step: 0.02\nbranch:\n  start_lambda: 1.5707963267948966\n"
      "  start_xi1: 1.0\n",
      collapse);
  CHECK(run_quiet(Command::branch, cfg) == ExitCode::numerical);
  CHECK(load(collapse / "error.json")["error"] == "TrivialCollapse");
  CHECK(load(collapse / "MANIFEST.json")["complete"] == false);

  RunConfig bad = config("system: example-tan\nlambda: [-2, 2]\n", scratch("invalid"));
  CHECK(run_quiet(Command::scan, bad) == ExitCode::validation);
}

TEST_CASE("dichotomy report") {
  const fs::path out = scratch("dich");
  const RunConfig cfg = config("system: example-linear\ndichotomy_samples: [0.5]\n", out);
  REQUIRE(run_quiet(Command::dichotomy, cfg) == ExitCode::ok);
  const json j = load(out / "projectors.json");
  REQUIRE(j["samples"].size() == 1);
  CHECK(j["samples"][0]["plus"]["rank"] == 1);
  CHECK(j["samples"][0]["minus"]["rank"] == 1);
}
