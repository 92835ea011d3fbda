#include "vascutherm/error.hpp"

namespace vascutherm {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::index_out_of_range: return "index-out-of-range";
    case ErrorCode::snap_failure: return "snap-failure";
    case ErrorCode::inlet_not_on_boundary: return "inlet-not-on-boundary";
    case ErrorCode::degenerate_element: return "degenerate-element";
    case ErrorCode::conflicting_constraint: return "conflicting-constraint";
    case ErrorCode::validation_failed: return "validation-failed";
    case ErrorCode::singular_system: return "singular-system";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::nonphysical_iterate: return "nonphysical-iterate";
    case ErrorCode::wrong_regime: return "wrong-regime";
    case ErrorCode::mismatched_mesh: return "mismatched-mesh";
    case ErrorCode::parse_error: return "parse-error";
    }
    return "unknown";
}

} // namespace vascutherm
