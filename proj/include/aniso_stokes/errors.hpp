#pragma once

#include <stdexcept>
#include <string>

namespace aniso_stokes {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// A field that must be nonnegative (density, pressure argument) is not.
class NegativeInput : public Error {
public:
    using Error::Error;
};

/// Time step exceeds the advective stability bound.
class CflViolation : public Error {
public:
    using Error::Error;
};

class NewtonFail : public Error {
public:
    using Error::Error;
};

/// Some nonzero wavevector has a non-invertible momentum symbol.
class SingularSymbol : public Error {
public:
    using Error::Error;
};

class NotCoercive : public Error {
public:
    using Error::Error;
};

class KrylovNoConvergence : public Error {
public:
    KrylovNoConvergence(int iterations, double residual)
        : Error("Krylov solver did not converge after " + std::to_string(iterations) +
                " iterations (relative residual " + std::to_string(residual) + ")"),
          iterations_(iterations),
          residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// Picard increments stopped shrinking on the current slab.
class NoContraction : public Error {
public:
    using Error::Error;
};

class SlabCollapse : public Error {
public:
    using Error::Error;
};

class WindowMismatch : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(int line, const std::string& reason)
        : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

class UnknownKey : public Error {
public:
    UnknownKey(int line, const std::string& key)
        : Error("line " + std::to_string(line) + ": unknown key '" + key + "'"), line_(line), key_(key) {}

    int line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    int line_;
    std::string key_;
};

class UnresolvedWavelength : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace aniso_stokes
