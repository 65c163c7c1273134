#pragma once

#include <stdexcept>
#include <string>

namespace mdccp {

/// Base class for all domain errors. `error_class()` is a stable,
/// machine-parsable identifier emitted by the CLI on failure.
class Error : public std::runtime_error {
public:
    Error(std::string error_class, const std::string& message)
        : std::runtime_error(message), class_(std::move(error_class)) {}

    const std::string& error_class() const noexcept { return class_; }

private:
    std::string class_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("parse-error", m) {}
};

struct InsufficientDataError : Error {
    explicit InsufficientDataError(const std::string& m) : Error("insufficient-data", m) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& m) : Error("domain-error", m) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("config-error", m) {}
};

struct ScaleError : Error {
    explicit ScaleError(const std::string& m) : Error("scale-error", m) {}
};

struct DegenerateBoxError : Error {
    explicit DegenerateBoxError(const std::string& m) : Error("degenerate-box", m) {}
};

struct DegenerateAssetError : Error {
    explicit DegenerateAssetError(const std::string& m) : Error("degenerate-asset", m) {}
};

struct ConditioningError : Error {
    explicit ConditioningError(const std::string& m) : Error("conditioning-error", m) {}
};

struct DegenerateConstraintsError : Error {
    explicit DegenerateConstraintsError(const std::string& m)
        : Error("degenerate-constraints", m) {}
};

struct EmptyPreferenceError : Error {
    explicit EmptyPreferenceError(const std::string& m) : Error("empty-preference", m) {}
};

struct CoverageError : Error {
    explicit CoverageError(const std::string& m) : Error("coverage-error", m) {}
};

struct InfeasibleSubperiodError : Error {
    explicit InfeasibleSubperiodError(const std::string& m)
        : Error("infeasible-subperiod", m) {}
};

}  // namespace mdccp
