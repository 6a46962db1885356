#pragma once

#include <stdexcept>
#include <string>

namespace depthpca {

// Error taxonomy. Validation-type errors (bad arguments, degenerate inputs)
// derive from InvalidInput so callers can map them to a single exit path;
// ConvergenceFailure carries the state of the failed iteration.

class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

class DegenerateData : public InvalidInput {
public:
    explicit DegenerateData(const std::string& what) : InvalidInput(what) {}
};

class DegenerateModel : public InvalidInput {
public:
    explicit DegenerateModel(const std::string& what) : InvalidInput(what) {}
};

class NotPositiveDefinite : public InvalidInput {
public:
    explicit NotPositiveDefinite(const std::string& what) : InvalidInput(what) {}
};

class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

class ConvergenceFailure : public std::runtime_error {
public:
    ConvergenceFailure(const std::string& what, int iterations, double residual)
        : std::runtime_error(what), iterations(iterations), residual(residual) {}

    int iterations;
    double residual;
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace depthpca
