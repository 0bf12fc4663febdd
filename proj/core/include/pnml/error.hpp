#pragma once

#include <stdexcept>
#include <string>

namespace pnml {

// Bad shapes, non-finite values, empty inputs. Maps to CLI exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Singular systems, root-finder or quadrature failures, training divergence.
// Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// XᵀX + λI is singular (λ = 0 with a rank-deficient design).
class SingularSystemError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// The test vector has no component outside the training row space.
class InSpanError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace pnml
