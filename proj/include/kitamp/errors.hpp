#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kitamp {

/// Base of every error thrown by the library. Each subclass maps onto one
/// CLI exit code (see tools/main.cpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A quantity lies outside the range where a model is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Bias/pump currents outside the superconducting operating regime.
class OperatingPointError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Inputs fail a type invariant (negative lengths, non-monotone grids, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Chains evaluated on different frequency grids.
class AlignmentError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    NumericalError(const std::string& what, std::size_t index = npos)
        : Error(what), index_(index) {}

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    /// Frequency index at which the failure occurred, or npos.
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

class StopbandError : public DomainError {
public:
    StopbandError(const std::string& what, double frequency)
        : DomainError(what), frequency_(frequency) {}
    double frequency() const noexcept { return frequency_; }

private:
    double frequency_;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class StructureError : public Error {
public:
    using Error::Error;
};

class FitError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public IoError {
public:
    ParseError(const std::string& what, std::size_t line)
        : IoError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace kitamp
