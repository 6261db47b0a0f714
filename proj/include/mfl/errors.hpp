#ifndef MFL_ERRORS_HPP
#define MFL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mfl {

// Base class for all library errors. Every failure mode named in a module
// contract gets its own type so callers (and the CLI exit-code mapping)
// can distinguish them.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Adaptive quadrature exceeded its subdivision budget before meeting tol.
class QuadratureNonConvergence : public Error {
public:
    using Error::Error;
};

// Fixed-point iteration exceeded max_iter (expected near sigma_c where f' ~ 1).
class NoConvergence : public Error {
public:
    using Error::Error;
};

// Expanding bracket search for f^{-1} ran past |m| = 1e6.
class BracketNotFound : public Error {
public:
    using Error::Error;
};

// critical_sigma precondition violated: the bracket endpoints do not
// straddle the phase transition.
class PredicateNotBracketed : public Error {
public:
    using Error::Error;
};

// Domain [a, inf) is incompatible with the fixed-point structure of f.
class InvalidDomain : public Error {
public:
    using Error::Error;
};

// The transition bump for r cannot satisfy r2 with positive slope.
class InfeasibleBump : public Error {
public:
    using Error::Error;
};

// A particle left [-1e6, 1e6]; dt is too large for the potential.
class NumericalBlowup : public Error {
public:
    NumericalBlowup(const std::string& what, double t)
        : Error(what), time(t) {}
    double time;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class BadRange : public Error {
public:
    using Error::Error;
};

class FileError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace mfl

#endif // MFL_ERRORS_HPP
