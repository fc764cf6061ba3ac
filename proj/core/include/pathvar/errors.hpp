#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathvar {

/// Precondition or invariant violation supplied by the caller.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation left the range where its result is meaningful
/// (underflow of every quadrature term, non-positive-definite covariance, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The particle integrator exhausted its sub-step budget.
class IntegrationFailure : public NumericalError {
public:
    IntegrationFailure(std::size_t cell, const std::string& what)
        : NumericalError(what + " (cell " + std::to_string(cell) + ")"), cell_(cell) {}

    [[nodiscard]] std::size_t cell() const noexcept { return cell_; }

private:
    std::size_t cell_;
};

/// Non-finite sample values reached a Monte Carlo reduction.
class EstimationFailure : public NumericalError {
public:
    EstimationFailure(std::vector<std::size_t> samples, const std::string& what)
        : NumericalError(describe(samples, what)), samples_(std::move(samples)) {}

    [[nodiscard]] const std::vector<std::size_t>& samples() const noexcept { return samples_; }

private:
    static std::string describe(const std::vector<std::size_t>& s, const std::string& what) {
        std::string msg = what + ": non-finite values at samples";
        const std::size_t shown = s.size() < 8 ? s.size() : 8;
        for (std::size_t i = 0; i < shown; ++i) msg += " " + std::to_string(s[i]);
        if (s.size() > shown) msg += " ... (" + std::to_string(s.size()) + " total)";
        return msg;
    }

    std::vector<std::size_t> samples_;
};

}  // namespace pathvar
