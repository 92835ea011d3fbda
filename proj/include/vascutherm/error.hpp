#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vascutherm {

enum class ErrorCode {
    invalid_argument,
    index_out_of_range,
    snap_failure,
    inlet_not_on_boundary,
    degenerate_element,
    conflicting_constraint,
    validation_failed,
    singular_system,
    no_convergence,
    nonphysical_iterate,
    wrong_regime,
    mismatched_mesh,
    parse_error,
};

/// Stable kebab-case name used in diagnostics and error JSON.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace vascutherm
