#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace defuse {

enum class ErrorKind {
  band_covers_domain,
  interface_touches_boundary,
  degenerate_normal,
  projection_failed,
  non_finite_output,
  shape_mismatch,
  non_finite_loss,
  empty_band_side,
  non_finite_update,
  diverged_training,
  missing_dirichlet,
  solver_breakdown,
  picard_diverged,
  unknown_problem,
  unknown_param,
  no_exact_solution,
  non_positive_error,
  io_error,
  usage_error,
  invalid_argument,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::band_covers_domain: return "BandCoversDomain";
    case ErrorKind::interface_touches_boundary: return "InterfaceTouchesBoundary";
    case ErrorKind::degenerate_normal: return "DegenerateNormal";
    case ErrorKind::projection_failed: return "ProjectionFailed";
    case ErrorKind::non_finite_output: return "NonFiniteOutput";
    case ErrorKind::shape_mismatch: return "ShapeMismatch";
    case ErrorKind::non_finite_loss: return "NonFiniteLoss";
    case ErrorKind::empty_band_side: return "EmptyBandSide";
    case ErrorKind::non_finite_update: return "NonFiniteUpdate";
    case ErrorKind::diverged_training: return "DivergedTraining";
    case ErrorKind::missing_dirichlet: return "MissingDirichlet";
    case ErrorKind::solver_breakdown: return "SolverBreakdown";
    case ErrorKind::picard_diverged: return "PicardDiverged";
    case ErrorKind::unknown_problem: return "UnknownProblem";
    case ErrorKind::unknown_param: return "UnknownParam";
    case ErrorKind::no_exact_solution: return "NoExactSolution";
    case ErrorKind::non_positive_error: return "NonPositiveError";
    case ErrorKind::io_error: return "IoError";
    case ErrorKind::usage_error: return "UsageError";
    case ErrorKind::invalid_argument: return "InvalidArgument";
  }
  return "Error";
}

}  // namespace defuse
