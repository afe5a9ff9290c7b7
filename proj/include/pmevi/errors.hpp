#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pmevi {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed argument: dimension mismatch, invalid distribution, bad config.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// An iterative solver reached its iteration cap.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, std::size_t iterations)
        : Error(what + " (residual " + std::to_string(residual) + " after " +
                std::to_string(iterations) + " iterations)"),
          residual_(residual), iterations_(iterations) {}

    double residual() const { return residual_; }
    std::size_t iterations() const { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/// A bias difference was queried for a pair that never commuted.
class NoEstimate : public Error {
public:
    using Error::Error;
};

/// The bias constraint graph contains a negative cycle.
class InfeasibleConstraints : public Error {
public:
    using Error::Error;
};

} // namespace pmevi
