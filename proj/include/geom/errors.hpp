#pragma once

#include <stdexcept>
#include <string>

namespace geom {

// Exception hierarchy. The CLI maps each family onto an exit code.

class GeomError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration, metric text or arguments (exit code 2).
class ConfigError : public GeomError {
public:
    using GeomError::GeomError;
};

/// Metric text syntax error with a 1-based source position.
class SyntaxError : public ConfigError {
public:
    SyntaxError(const std::string& what, int line, int column)
        : ConfigError(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Point outside the chart, or an expression that evaluated to a non-finite value (exit code 3).
class DomainError : public GeomError {
public:
    using GeomError::GeomError;
};

/// Metric determinant below the singularity threshold (exit code 3).
class SingularMetricError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Eigenvalue sign pattern of the metric does not match the declared signature (exit code 3).
class SignatureMismatchError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Tensor shapes or slot kinds are incompatible with the requested operation.
class ShapeError : public GeomError {
public:
    using GeomError::GeomError;
};

/// Normal chart is not valid where requested: conjugate point, non-positive conformal bracket (exit code 4).
class ChartValidityError : public GeomError {
public:
    using GeomError::GeomError;
};

/// Integrator failure or invariant drift beyond the accepted threshold (exit code 5).
class NumericalQualityError : public GeomError {
public:
    using GeomError::GeomError;
};

}  // namespace geom
