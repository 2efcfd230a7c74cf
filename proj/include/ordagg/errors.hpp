#pragma once

#include <stdexcept>
#include <string>

namespace ordagg {

// Argument outside the domain of an operation (level outside [0,1], empty sample, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// The pair (F, G) does not satisfy F <=_st G at the checked resolution.
class OrderViolation : public std::runtime_error {
public:
    OrderViolation(const std::string& what, double max_violation, double witness)
        : std::runtime_error(what), max_violation_(max_violation), witness_(witness) {}

    double max_violation() const noexcept { return max_violation_; }
    double witness() const noexcept { return witness_; }

private:
    double max_violation_;
    double witness_;
};

// The discrete directional transport ran out of admissible targets.
class InfeasiblePlan : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// U <= L in a DU-spread computation.
class DegenerateSpread : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// File could not be read or written, or its contents did not parse.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ordagg
