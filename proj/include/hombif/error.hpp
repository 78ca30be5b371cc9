#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hombif {

enum class ErrorKind {
  invalid_argument,
  domain_exit,
  step_failure,
  overflow,
  no_gap,
  non_decay,
  angle_too_large,
  rank_collapse,
  endpoint_critical,
  no_hyperbolic_window,
  no_intersection,
  no_convergence,
  trivial_collapse,
  continuation_stall,
  inconclusive,
  index_mismatch,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for every numerical failure in the library. The
/// optional location is the time or parameter value where it happened.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<double> where = std::nullopt)
      : std::runtime_error(what), kind_(kind), where_(where) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<double> where() const noexcept { return where_; }

 private:
  ErrorKind kind_;
  std::optional<double> where_;
};

}  // namespace hombif
