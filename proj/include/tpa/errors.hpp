#pragma once

#include <stdexcept>
#include <string>

namespace tpa {

/// Base for every failure the engine reports. `gate()` names the check that
/// failed so callers (the CLI, the sweep harness) can report or tag it.
class Error : public std::runtime_error {
public:
    Error(std::string gate, const std::string& message)
        : std::runtime_error(gate + ": " + message), gate_(std::move(gate)) {}

    const std::string& gate() const noexcept { return gate_; }

private:
    std::string gate_;
};

#define TPA_DEFINE_ERROR(Name, gate_name)                                  \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& message) : Error(gate_name, message) {} \
    }

TPA_DEFINE_ERROR(TruncationError, "truncation");
TPA_DEFINE_ERROR(InvalidSpec, "invalid_spec");
TPA_DEFINE_ERROR(DimensionMismatch, "dimension_mismatch");
TPA_DEFINE_ERROR(NonHermitianInput, "non_hermitian");
TPA_DEFINE_ERROR(NegativeState, "negative_state");
TPA_DEFINE_ERROR(GridTooNarrow, "grid_too_narrow");
TPA_DEFINE_ERROR(ConvergenceError, "quadrature_convergence");
TPA_DEFINE_ERROR(ZeroSignal, "zero_signal");
TPA_DEFINE_ERROR(InsufficientPoints, "insufficient_points");
TPA_DEFINE_ERROR(ZeroPhotons, "zero_photons");
TPA_DEFINE_ERROR(UnsupportedFamily, "unsupported_family");
TPA_DEFINE_ERROR(NonPositiveInput, "non_positive_input");
TPA_DEFINE_ERROR(ConfigError, "config");
TPA_DEFINE_ERROR(IoError, "io");

#undef TPA_DEFINE_ERROR

} // namespace tpa
