#pragma once

#include <stdexcept>
#include <string>

namespace tvrise {

/// Bad argument: wrong dimension, non-finite input, out-of-domain value.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Unknown built-in scenario or controller name.
class IdentifierError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent configuration (JSON schema, overrides, invariants).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A linear-algebra precondition failed (ill-conditioned or indefinite matrix).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An internal invariant of the controller or simulator was violated.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace tvrise
