#pragma once

#include <stdexcept>
#include <string>

namespace isilab {

struct InvalidParameter : std::invalid_argument {
    explicit InvalidParameter(const std::string& msg) : std::invalid_argument(msg) {}
};

// All-zero tap row: the channel carries no signal and cannot be normalized.
struct DegenerateChannel : std::runtime_error {
    explicit DegenerateChannel(const std::string& msg) : std::runtime_error(msg) {}
};

// A caller broke a documented precondition (e.g. fed an unnormalized profile
// where a normalized one is required).
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

struct NumericalDegeneracy : std::runtime_error {
    explicit NumericalDegeneracy(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or inconsistent run configuration; the message names the offending key.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace isilab
