#pragma once

#include <stdexcept>
#include <string>

namespace selfnorm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Adaptive refinement could not reach the requested tolerance in budget.
struct QuadratureFailure : Error {
    using Error::Error;
};

/// Second moment is zero (or a law otherwise fails its invariants).
struct DegenerateDistribution : Error {
    using Error::Error;
};

/// Per-member moment sets were computed at different tilting scales b.
struct MixedScale : Error {
    using Error::Error;
};

/// Argument outside the mathematical domain of the operation.
struct DomainError : Error {
    using Error::Error;
};

/// A deterministic tail fell below the representable range.
struct UnderflowError : Error {
    using Error::Error;
};

/// Config file could not be parsed; carries line/field diagnostics.
struct ConfigError : Error {
    int line = 0;
    std::string field;
    ConfigError(const std::string& msg, int line_, std::string field_ = "")
        : Error(msg), line(line_), field(std::move(field_)) {}
};

} // namespace selfnorm
