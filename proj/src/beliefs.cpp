#include "stratexp/beliefs.hpp"

#include <string>

namespace stratexp {

namespace {

constexpr double kPoissonTail = 1e-13;

std::vector<double> truncated_poisson(double rate) {
    if (rate <= 0.0) return {1.0};
    std::vector<double> pmf;
    double term = std::exp(-rate);
    double cum = 0.0;
    for (int j = 0;; ++j) {
        if (j > 0) term *= rate / j;
        pmf.push_back(term);
        cum += term;
        // Past the mode the terms decrease, so 1 - cum bounds the tail.
        if (j > rate && 1.0 - cum < kPoissonTail) break;
        if (j > 100000) break;
    }
    return pmf;
}

}  // namespace

double jump_posterior(const Model& model, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("j(p) requires p in [0, 1], got " + std::to_string(p));
    if (p == 0.0 || p == 1.0) return p;
    const double lam = model.lambda(p);
    if (lam == 0.0) return p;
    if (model.lambda0() == 0.0) return 1.0;
    return model.lambda1() * p / lam;
}

double log_odds(double p) { return std::log(p) - std::log1p(-p); }

double logistic(double l) {
    if (l >= 0.0) return 1.0 / (1.0 + std::exp(-l));
    const double e = std::exp(l);
    return e / (1.0 + e);
}

LogOddsMoments logodds_moments(const Model& model, int theta, int K, double delta, int J) {
    if (K < 1) throw ValidationError("logodds_moments: K must be at least 1");
    if (theta != 0 && theta != 1) throw ValidationError("logodds_moments: theta must be 0 or 1");
    if (J < 0) throw ValidationError("logodds_moments: J must be non-negative");
    LogOddsMoments mom;
    if (model.lambda0() == 0.0 && J >= 1) {
        mom.absorbing = true;
        return mom;
    }
    const double half_rho = 0.5 * model.rho();
    const double dl = model.lambda1() - model.lambda0();
    mom.mean_shift = -K * (dl + (theta == 1 ? -half_rho : half_rho)) * delta;
    if (J > 0 && model.lambda1() != model.lambda0())
        mom.mean_shift += J * std::log(model.lambda1() / model.lambda0());
    mom.variance = K * model.rho() * delta;
    return mom;
}

TransitionKernel::TransitionKernel(const Model& model, int K, double delta)
    : model_(model), K_(K), delta_(delta), sd_(0.0), drift_{0.0, 0.0}, jump_step_(0.0),
      rule_(&GaussHermiteRule::standard()) {
    if (K < 0) throw ValidationError("transition kernel: K must be non-negative");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw ValidationError("transition kernel: delta must be positive");
    if (K == 0) {
        pmf_[0] = pmf_[1] = {1.0};
        return;
    }
    sd_ = std::sqrt(K * model.rho() * delta);
    drift_[0] = logodds_moments(model, 0, K, delta, 0).mean_shift;
    drift_[1] = logodds_moments(model, 1, K, delta, 0).mean_shift;
    if (model.lambda0() > 0.0 && model.lambda1() != model.lambda0())
        jump_step_ = std::log(model.lambda1() / model.lambda0());
    pmf_[0] = truncated_poisson(K * model.lambda0() * delta);
    pmf_[1] = truncated_poisson(K * model.lambda1() * delta);
}

double TransitionKernel::total_mass(double p) const {
    double acc = 0.0;
    for_each_outcome(p, [&](double w, double) { acc += w; });
    return acc;
}

double TransitionKernel::sample_posterior(double p, std::mt19937_64& rng) const {
    if (K_ == 0 || p <= 0.0 || p >= 1.0) return p;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int theta = unif(rng) < p ? 1 : 0;
    const double rate = K_ * (theta == 1 ? model_.lambda1() : model_.lambda0()) * delta_;
    long J = 0;
    if (rate > 0.0) J = std::poisson_distribution<long>(rate)(rng);
    if (model_.lambda0() == 0.0 && J >= 1) return 1.0;
    double l = log_odds(p) + drift_[theta] + static_cast<double>(J) * jump_step_;
    if (sd_ > 0.0) l += sd_ * std::normal_distribution<double>(0.0, 1.0)(rng);
    return logistic(l);
}

double generator_fd(const Model& model, int K, const std::function<double(double)>& w, double p, double h) {
    const double q = p * (1.0 - p);
    const double w0 = w(p);
    const double wp = w(p + h);
    const double wm = w(p - h);
    double g = 0.5 * model.rho() * q * q * (wp - 2.0 * w0 + wm) / (h * h);
    g -= (model.lambda1() - model.lambda0()) * q * (wp - wm) / (2.0 * h);
    g += model.lambda(p) * (w(jump_posterior(model, p)) - w0);
    return K * g;
}

}  // namespace stratexp
