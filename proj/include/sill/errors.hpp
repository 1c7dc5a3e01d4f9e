#pragma once

#include <stdexcept>
#include <string>

namespace sill {

// Caller violated a documented precondition (dimension mismatch, bad index,
// invalid parameter value).
struct ContractError : std::invalid_argument {
    explicit ContractError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Non-finite or otherwise out-of-domain numeric input.
struct DomainError : std::domain_error {
    explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// An internal invariant that should hold by construction was found broken
// (e.g. a join-closed dictionary missing a join element).
struct InvariantError : std::logic_error {
    explicit InvariantError(const std::string& msg) : std::logic_error(msg) {}
};

// Request would exceed a hard resource limit (e.g. sample grids above 1e7 points).
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration file failed parsing or validation. `where` is a JSON path or
// line anchor identifying the offending element.
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& where_, const std::string& msg)
        : std::runtime_error(where_ + ": " + msg), where(where_) {}
    std::string where;
};

} // namespace sill
