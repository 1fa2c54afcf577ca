#pragma once

#include <stdexcept>
#include <string>

namespace permuton {

/// Malformed or out-of-domain arguments. CLI exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The request is well formed but beyond what the implementation can do
/// (exhaustive range, rejection budget). CLI exit code 3.
class CapabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine did not reach its tolerance. Carries the best
/// estimate it did reach. CLI exit code 4.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double estimate, double error_bound)
        : std::runtime_error(what), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

}  // namespace permuton
