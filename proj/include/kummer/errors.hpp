#pragma once

#include <stdexcept>
#include <string>

namespace kummer {

// Bad input: a precondition of an operation does not hold.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ValidationKind {
    Malformed,             // n < 2, s < 3, non-positive exponent, ...
    RamificationViolation, // n | d_i
    DegreeViolation,       // sum d_i != 0 mod n
    ReducibleCurve,        // gcd(d) shares a factor with n
    ZeroEntry,             // zero entry handed to smith_row
    TransversalUnavailable // gcd(d_1..d_{s-1}) not prime to n
};

inline const char* to_string(ValidationKind k) {
    switch (k) {
    case ValidationKind::Malformed: return "Malformed";
    case ValidationKind::RamificationViolation: return "RamificationViolation";
    case ValidationKind::DegreeViolation: return "DegreeViolation";
    case ValidationKind::ReducibleCurve: return "ReducibleCurve";
    case ValidationKind::ZeroEntry: return "ZeroEntry";
    case ValidationKind::TransversalUnavailable: return "TransversalUnavailable";
    }
    return "Unknown";
}

// Input data that cannot describe an admissible cover (or SNF input).
class ValidationError : public DomainError {
public:
    ValidationError(ValidationKind kind, const std::string& what)
        : DomainError(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ValidationKind kind() const noexcept { return kind_; }

private:
    ValidationKind kind_;
};

// Two routes that must agree did not. Always a bug, never bad input.
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// A numeric rank estimate sits too close to the threshold to be trusted.
class NumericalInstability : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace kummer
