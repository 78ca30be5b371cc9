#include "hombif/error.hpp"

namespace hombif {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::domain_exit: return "DomainExit";
    case ErrorKind::step_failure: return "StepFailure";
    case ErrorKind::overflow: return "Overflow";
    case ErrorKind::no_gap: return "NoGap";
    case ErrorKind::non_decay: return "NonDecay";
    case ErrorKind::angle_too_large: return "AngleTooLarge";
    case ErrorKind::rank_collapse: return "RankCollapse";
    case ErrorKind::endpoint_critical: return "EndpointCritical";
    case ErrorKind::no_hyperbolic_window: return "NoHyperbolicWindow";
    case ErrorKind::no_intersection: return "NoIntersection";
    case ErrorKind::no_convergence: return "NoConvergence";
    case ErrorKind::trivial_collapse: return "TrivialCollapse";
    case ErrorKind::continuation_stall: return "ContinuationStall";
    case ErrorKind::inconclusive: return "Inconclusive";
    case ErrorKind::index_mismatch: return "IndexMismatch";
  }
  return "Unknown";
}

}  // namespace hombif
