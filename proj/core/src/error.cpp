#include "spinflow/error.hpp"

namespace spinflow {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::outside_tube: return "OutsideTube";
    case ErrorCode::cut_locus: return "CutLocus";
    case ErrorCode::structure_unavailable: return "StructureUnavailable";
    case ErrorCode::tangency_violation: return "TangencyViolation";
    case ErrorCode::ambiguous_cluster: return "AmbiguousCluster";
    case ErrorCode::contour_hits_spectrum: return "ContourHitsSpectrum";
    case ErrorCode::eigen_failure: return "EigenFailure";
    case ErrorCode::solver_failure: return "SolverFailure";
    case ErrorCode::degenerate_projection: return "DegenerateProjection";
    case ErrorCode::odd_kernel_dimension: return "OddKernelDimension";
    case ErrorCode::unsupported_index: return "Unsupported";
    case ErrorCode::degenerate_degree: return "DegenerateDegree";
    case ErrorCode::tube_exit: return "TubeExit";
    case ErrorCode::config_error: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace spinflow
