#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtfs {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One broken invariant. `subject` names the offending unit, block or field
/// ("snapshot" for system-level checks).
struct Violation {
    std::string subject;
    std::string message;

    bool operator==(const Violation&) const = default;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations);
    ValidationError(std::string subject, std::string message)
        : ValidationError(std::vector<Violation>{Violation{std::move(subject), std::move(message)}}) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Raised by the time march; carries the step at which the state went bad.
class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::size_t step)
        : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::string field, std::size_t line, std::size_t column, const std::string& what);

    const std::string& field() const noexcept { return field_; }
    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::string field_;
    std::size_t line_;
    std::size_t column_;
};

class StorageError : public Error {
public:
    using Error::Error;
};

} // namespace rtfs
