#include "hombif/commands.hpp"
#include "hombif/config.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace hombif::cli;
  CLI::App app{"Homoclinic bifurcation toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::string> out;
  std::optional<double> lambda_min, lambda_max, grid_step, horizon;

  std::vector<CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"scan", "Evans function on a lambda grid and its critical set"},
      {"bifurcations", "sign-change certificates, parities and the J-cover"},
      {"branch", "switch onto a nontrivial branch and continue it"},
      {"classify", "classify recorded continua against the J-cover"},
      {"verify-example", "run the acceptance checks on the planar example"},
      {"dichotomy", "dichotomy subspaces and constants at sample points"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "YAML configuration file");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--lambda-min", lambda_min, "lower end of the lambda window");
    sub->add_option("--lambda-max", lambda_max, "upper end of the lambda window");
    sub->add_option("--grid-step", grid_step, "lambda grid step");
    sub->add_option("--horizon", horizon, "dichotomy horizon T");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : ExitCode::validation;
  }

  Command command = Command::scan;
  for (CLI::App* sub : subs) {
    if (sub->parsed()) command = *parse_command(sub->get_name());
  }
  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = parse_config(config_path);
  } catch (const ParseError& e) {
    std::cerr << "error: " << config_path << ":" << e.line() << ": " << e.what() << "\n";
    return ExitCode::validation;
  }
  if (out) cfg.output = *out;
  if (lambda_min) cfg.lambda_min = *lambda_min;
  if (lambda_max) cfg.lambda_max = *lambda_max;
  if (grid_step) cfg.grid_step = *grid_step;
  if (horizon) cfg.horizon = *horizon;
  return run(command, cfg, std::cout);
}
