#pragma once

#include "hombif/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hombif::cli {

enum class Command { scan, bifurcations, branch, classify, verify_example, dichotomy };

std::optional<Command> parse_command(std::string_view name);
std::string_view to_string(Command c);

enum ExitCode : int { ok = 0, validation = 2, numerical = 3, inconclusive = 4 };

/// Runs a command and writes its artifacts under cfg.output. Every run ends
/// with MANIFEST.json; failures also write error.json. Progress and
/// verification lines go to log.
int run(Command command, const RunConfig& cfg, std::ostream& log);

/// CSV number formatting shared by all artifacts.
std::string format_number(double v);

}  // namespace hombif::cli
