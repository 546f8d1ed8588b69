#ifndef FEEDERSIM_ERRORS_HPP
#define FEEDERSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace feedersim {

/// Invalid input: a precondition or data invariant was violated.
/// what() names the offending field or quantity.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// The nonlinear power-flow sweep did not converge within the iteration
/// budget. Carries the last residual so the caller can tell a marginal
/// case from a badly infeasible circuit.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& msg, double residual, int iterations)
        : std::runtime_error(msg), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// I/O or file-format failure (missing file, bad magic, malformed row).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace feedersim

#endif
