#pragma once

#include <stdexcept>
#include <string>

namespace stratexp {

/// Raised when model parameters (or any numeric input) violate a stated invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a function is evaluated outside its mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised by iterative solvers that exhaust their iteration budget.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual, std::size_t iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    std::size_t iterations() const noexcept { return iterations_; }

private:
    double residual_;
    std::size_t iterations_;
};

/// Game primitives. Payoff of the risky arm: dX = alpha_theta dt + sigma dZ + h dN,
/// with N a Poisson process of intensity lambda_theta; the safe arm pays s.
struct ModelParams {
    double r = 1.0;
    double s = 1.0;
    double sigma = 1.0;
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double h = 1.0;
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    int N = 1;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct DerivedQuantities {
    double rho;       ///< signal-to-noise ratio (alpha1 - alpha0)^2 / sigma^2
    double m0;        ///< expected risky flow in state 0
    double m1;        ///< expected risky flow in state 1
    double p_myopic;  ///< belief at which m(p) = s
};

/// Throws ValidationError naming the first violated invariant.
void validate(const ModelParams& params);

DerivedQuantities derive(const ModelParams& params);

/// Validated, immutable model: parameters plus derived scalars and the
/// belief-dependent flow quantities m(p), c(p) and lambda(p).
class Model {
public:
    explicit Model(const ModelParams& params);

    const ModelParams& params() const noexcept { return params_; }
    const DerivedQuantities& derived() const noexcept { return derived_; }

    double r() const noexcept { return params_.r; }
    double s() const noexcept { return params_.s; }
    int N() const noexcept { return params_.N; }
    double lambda0() const noexcept { return params_.lambda0; }
    double lambda1() const noexcept { return params_.lambda1; }
    double rho() const noexcept { return derived_.rho; }
    double m0() const noexcept { return derived_.m0; }
    double m1() const noexcept { return derived_.m1; }
    double p_myopic() const noexcept { return derived_.p_myopic; }

    /// rho == 0 exactly, i.e. alpha1 == alpha0.
    bool pure_poisson() const noexcept { return derived_.rho == 0.0; }
    /// lambda0 == 0: the first lump sum reveals theta = 1.
    bool conclusive_news() const noexcept { return params_.lambda0 == 0.0; }
    /// Neither the Brownian nor the Poisson component is informative.
    bool no_learning() const noexcept {
        return derived_.rho == 0.0 && params_.lambda1 == params_.lambda0;
    }

    double m(double p) const noexcept { return p * derived_.m1 + (1.0 - p) * derived_.m0; }
    double c(double p) const noexcept { return params_.s - m(p); }
    double lambda(double p) const noexcept {
        return p * params_.lambda1 + (1.0 - p) * params_.lambda0;
    }

    /// Per-period discount factor exp(-r * delta).
    double discount(double delta) const;

    /// Same primitives with a different player count (validated).
    Model with_players(int N) const;

private:
    ModelParams params_;
    DerivedQuantities derived_;
};

}  // namespace stratexp
