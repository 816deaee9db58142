#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace opencav {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can map whole families to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failures: exit code 3 at the CLI.
class NumericalError : public Error {
public:
    using Error::Error;
};

class InvalidMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularMatrix : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConvergenceFailure : public NumericalError {
public:
    ConvergenceFailure(const std::string& what, double residual,
                       std::vector<double> best_point = {}, double best_value = 0.0)
        : NumericalError(what), residual_(residual), best_point_(std::move(best_point)),
          best_value_(best_value) {}

    double residual() const noexcept { return residual_; }
    const std::vector<double>& best_point() const noexcept { return best_point_; }
    double best_value() const noexcept { return best_value_; }

private:
    double residual_;
    std::vector<double> best_point_;
    double best_value_;
};

class OutsideBand : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class PoleOnAxis : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DefectiveSpectrum : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NotFound : public NumericalError {
public:
    NotFound(const std::string& what, std::vector<double> best_point, double separation)
        : NumericalError(what), best_point_(std::move(best_point)), separation_(separation) {}

    const std::vector<double>& best_point() const noexcept { return best_point_; }
    double separation() const noexcept { return separation_; }

private:
    std::vector<double> best_point_;
    double separation_;
};

class Undefined : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NotNormalized : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Model / configuration errors: exit code 2 at the CLI.
class InvalidGeometry : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class ValidationError : public Error {
public:
    ValidationError(const std::string& field, const std::string& what)
        : Error(field + ": " + what), field_(field) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// I/O: exit code 4.
class WriteError : public Error {
public:
    using Error::Error;
};

}  // namespace opencav
