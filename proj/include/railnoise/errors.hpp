#pragma once

#include <stdexcept>
#include <string>

namespace railnoise {

/// Invalid physical parameter, precondition violation or bad configuration.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

/// A configuration that the model does not cover (e.g. asymmetric ends
/// where a symmetric-suspension formula is requested).
class unsupported_configuration : public validation_error {
public:
    explicit unsupported_configuration(const std::string& what) : validation_error(what) {}
};

/// Numerical failure (root bracketing, non-convergence, ...).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// The boundary system is singular: an undamped resonance was hit exactly.
/// Carries the offending angular frequency.
class resonance_error : public numeric_error {
public:
    resonance_error(const std::string& what, double omega)
        : numeric_error(what), omega_(omega) {}
    double omega() const { return omega_; }

private:
    double omega_;
};

/// File system / stream failure.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace railnoise
