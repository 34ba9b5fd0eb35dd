#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fairvol {

// Failures raised while processing otherwise well-formed requests: broken
// input files, degenerate windows, non-converging numeric procedures.
// Parameter-contract violations (bad H, bad alpha, short series) throw
// std::invalid_argument / std::domain_error instead, so callers can tell
// "your request is malformed" apart from "this data cannot be processed".
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent input data. `line` is 1-based when the source
// is a text file, 0 when no location applies.
class DataError : public Error {
public:
    DataError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Estimator could not produce a value at a specific window position.
class EstimationError : public Error {
public:
    EstimationError(const std::string& what, std::size_t index)
        : Error(what + " (window ending at index " + std::to_string(index) + ")"),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

// Path generator failed (e.g. covariance embedding not positive definite
// beyond tolerance and the dense fallback also failed).
class SimulationError : public Error {
public:
    explicit SimulationError(const std::string& what) : Error(what) {}
};

// A numeric routine did not meet its convergence / accuracy contract.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(what) {}
};

}  // namespace fairvol
