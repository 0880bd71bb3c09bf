#pragma once

#include <functional>

#include "stratexp/model.hpp"

namespace stratexp {

/// Positive root of f(mu; x) = (rho/2) mu (mu+1) + (l1-l0) mu + l0 (l0/l1)^mu - l0 - r/x.
struct MuRoot {
    double x;
    double mu;
    double residual;  ///< |f(mu; x)| at the returned root
};

/// f(mu; x) written in terms of r/x. The (l0/l1)^mu term is exactly 0 when
/// l0 == 0 and exactly 1 when l1 == l0 (including l1 == l0 == 0).
double mu_equation(double mu, double rho, double lambda1, double lambda0, double r_over_x);

/// Root of mu_equation for raw learning rates. Throws DomainError when there
/// is no learning (rho == 0 and lambda1 == lambda0), ConvergenceError if the
/// refinement cannot reach |f| <= 1e-12.
MuRoot solve_mu(double rho, double lambda1, double lambda0, double r_over_x);

/// mu_x for the model's primitives; x = N gives the planner root, x = 1 the
/// single-agent root. x may be any positive real.
MuRoot solve_mu(const Model& model, double x);

/// Cutoff p*_x = mu (s - m0) / ((mu + 1)(m1 - s) + mu (s - m0)).
double cutoff_from_mu(const Model& model, double mu);
double cutoff_pstar(const Model& model, double x);

// u(p; mu) = (1-p) ((1-p)/p)^mu, strictly decreasing and convex on (0,1].
// Throws DomainError for p <= 0 or p > 1. Arguments closer than 1e-12 to
// either end are clamped before evaluation.
double u(double p, double mu);
double u_prime(double p, double mu);
double u_second(double p, double mu);

/// Twice-differentiable function of the belief given analytically.
struct AnalyticFunction {
    std::function<double(double)> value;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
};

enum class ValueKind { single_agent, planner, cutoff_policy };

/// value(p) = s for p <= cutoff and m(p) + C u(p; mu) above, with
/// C = c(cutoff) / u(cutoff; mu) so that the function is continuous.
class ClosedFormValue {
public:
    ValueKind kind() const noexcept { return kind_; }
    double cutoff() const noexcept { return cutoff_; }
    double mu() const noexcept { return mu_; }
    double C() const noexcept { return C_; }
    /// True for a cutoff-policy payoff whose cutoff lies below p_N*: the
    /// formula still evaluates but no longer describes an equilibrium object.
    bool outside_domain() const noexcept { return outside_domain_; }

    double operator()(double p) const;
    /// Derivatives; at and below the cutoff these are the left derivatives (0).
    double d1(double p) const;
    double d2(double p) const;
    /// Right derivative at the cutoff.
    double right_slope_at_cutoff() const;

    AnalyticFunction as_function() const;

    friend ClosedFormValue single_agent_value(const Model& model);
    friend ClosedFormValue planner_value(const Model& model);
    friend ClosedFormValue cutoff_policy_value(const Model& model, double cutoff);

private:
    ClosedFormValue(const Model& model, ValueKind kind, double cutoff, double mu, bool outside);

    ValueKind kind_;
    double cutoff_;
    double mu_;
    double C_;
    double s_, m0_, m1_;
    bool outside_domain_;
};

/// V_1^*: single agent, cutoff p_1^*.
ClosedFormValue single_agent_value(const Model& model);
/// V_N^*: planner, cutoff p_N^*.
ClosedFormValue planner_value(const Model& model);
/// V_{N,cutoff}: all N players experiment iff the belief exceeds `cutoff`.
ClosedFormValue cutoff_policy_value(const Model& model, double cutoff);

/// b(p, v) = (rho/2r) p^2 (1-p)^2 v'' - ((l1-l0)/r) p (1-p) v' + (lambda(p)/r) [v(j(p)) - v(p)].
double informational_benefit(const Model& model, double p, const AnalyticFunction& v);
double informational_benefit(const Model& model, double p, const ClosedFormValue& v);

}  // namespace stratexp
