#include "stratexp/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "stratexp/beliefs.hpp"

namespace stratexp {

namespace {

constexpr double kMuTolerance = 1e-12;
constexpr double kEvalGuard = 1e-12;

double clamp_belief(double p) {
    if (!(p > 0.0) || p > 1.0) throw DomainError("u(p; mu) requires p in (0, 1], got " + std::to_string(p));
    return std::clamp(p, kEvalGuard, 1.0 - kEvalGuard);
}

}  // namespace

double mu_equation(double mu, double rho, double lambda1, double lambda0, double r_over_x) {
    double jump_term = 0.0;
    if (lambda0 == 0.0) {
        jump_term = 0.0;
    } else if (lambda1 == lambda0) {
        jump_term = lambda0;
    } else {
        jump_term = lambda0 * std::pow(lambda0 / lambda1, mu);
    }
    return 0.5 * rho * mu * (mu + 1.0) + (lambda1 - lambda0) * mu + jump_term - lambda0 - r_over_x;
}

MuRoot solve_mu(double rho, double lambda1, double lambda0, double r_over_x) {
    if (!(r_over_x > 0.0) || !std::isfinite(r_over_x)) throw ValidationError("solve_mu: r/x must be positive");
    if (rho == 0.0 && lambda1 == lambda0)
        throw DomainError("solve_mu: no learning (rho == 0 and lambda1 == lambda0), no positive root");
    auto f = [&](double mu) { return mu_equation(mu, rho, lambda1, lambda0, r_over_x); };

    double lo = 1e-9;
    if (f(lo) >= 0.0) lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (f(hi) <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 1100) throw ConvergenceError("solve_mu: failed to bracket root", f(hi), doublings);
    }

    std::uintmax_t max_iter = 200;
    const auto tol = boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 1);
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi), tol, max_iter);
    double mu = std::abs(f(a)) <= std::abs(f(b)) ? a : b;

    // Bisection polish in case TOMS748 stopped on bracket width before the residual bound.
    for (int i = 0; i < 200 && std::abs(f(mu)) > kMuTolerance; ++i) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        (f(mid) < 0.0 ? a : b) = mid;
        mu = std::abs(f(a)) <= std::abs(f(b)) ? a : b;
    }
    const double residual = std::abs(f(mu));
    if (residual > kMuTolerance && std::nextafter(a, b) < b)
        throw ConvergenceError("solve_mu: residual above tolerance in bracket [" + std::to_string(a) + ", " +
                                   std::to_string(b) + "]",
                               residual, static_cast<std::size_t>(max_iter));
    return MuRoot{0.0, mu, residual};
}

MuRoot solve_mu(const Model& model, double x) {
    if (!(x > 0.0)) throw ValidationError("solve_mu: x must be positive");
    MuRoot root = solve_mu(model.rho(), model.lambda1(), model.lambda0(), model.r() / x);
    root.x = x;
    return root;
}

double cutoff_from_mu(const Model& model, double mu) {
    const double lo = model.s() - model.m0();
    const double hi = model.m1() - model.s();
    return mu * lo / ((mu + 1.0) * hi + mu * lo);
}

double cutoff_pstar(const Model& model, double x) { return cutoff_from_mu(model, solve_mu(model, x).mu); }

double u(double p, double mu) {
    if (p == 1.0) return 0.0;
    p = clamp_belief(p);
    return (1.0 - p) * std::pow((1.0 - p) / p, mu);
}

double u_prime(double p, double mu) {
    if (p == 1.0) return 0.0;
    p = clamp_belief(p);
    return -(mu + p) / (p * (1.0 - p)) * u(p, mu);
}

double u_second(double p, double mu) {
    if (p == 1.0) return 0.0;
    p = clamp_belief(p);
    return mu * (mu + 1.0) / (p * p * (1.0 - p) * (1.0 - p)) * u(p, mu);
}

ClosedFormValue::ClosedFormValue(const Model& model, ValueKind kind, double cutoff, double mu, bool outside)
    : kind_(kind),
      cutoff_(cutoff),
      mu_(mu),
      C_(model.c(cutoff) / u(cutoff, mu)),
      s_(model.s()),
      m0_(model.m0()),
      m1_(model.m1()),
      outside_domain_(outside) {}

double ClosedFormValue::operator()(double p) const {
    if (p <= cutoff_) return s_;
    return p * m1_ + (1.0 - p) * m0_ + C_ * u(p, mu_);
}

double ClosedFormValue::d1(double p) const {
    if (p <= cutoff_) return 0.0;
    return (m1_ - m0_) + C_ * u_prime(p, mu_);
}

double ClosedFormValue::d2(double p) const {
    if (p <= cutoff_) return 0.0;
    return C_ * u_second(p, mu_);
}

double ClosedFormValue::right_slope_at_cutoff() const { return (m1_ - m0_) + C_ * u_prime(cutoff_, mu_); }

AnalyticFunction ClosedFormValue::as_function() const {
    const ClosedFormValue self = *this;
    return AnalyticFunction{[self](double p) { return self(p); }, [self](double p) { return self.d1(p); },
                            [self](double p) { return self.d2(p); }};
}

ClosedFormValue single_agent_value(const Model& model) {
    const double mu = solve_mu(model, 1.0).mu;
    return ClosedFormValue(model, ValueKind::single_agent, cutoff_from_mu(model, mu), mu, false);
}

ClosedFormValue planner_value(const Model& model) {
    const double mu = solve_mu(model, model.N()).mu;
    return ClosedFormValue(model, ValueKind::planner, cutoff_from_mu(model, mu), mu, false);
}

ClosedFormValue cutoff_policy_value(const Model& model, double cutoff) {
    if (!(cutoff > 0.0 && cutoff < 1.0)) throw ValidationError("cutoff-policy value: cutoff must lie in (0, 1)");
    const double mu = solve_mu(model, model.N()).mu;
    const bool outside = cutoff < cutoff_from_mu(model, mu);
    return ClosedFormValue(model, ValueKind::cutoff_policy, cutoff, mu, outside);
}

double informational_benefit(const Model& model, double p, const AnalyticFunction& v) {
    const double r = model.r();
    const double q = p * (1.0 - p);
    double b = 0.0;
    if (model.rho() > 0.0) b += 0.5 * model.rho() / r * q * q * v.d2(p);
    if (model.lambda1() != model.lambda0()) b -= (model.lambda1() - model.lambda0()) / r * q * v.d1(p);
    if (model.lambda(p) > 0.0) b += model.lambda(p) / r * (v.value(jump_posterior(model, p)) - v.value(p));
    return b;
}

double informational_benefit(const Model& model, double p, const ClosedFormValue& v) {
    return informational_benefit(model, p, v.as_function());
}

}  // namespace stratexp
