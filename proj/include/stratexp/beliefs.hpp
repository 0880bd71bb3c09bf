#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "stratexp/model.hpp"
#include "stratexp/quadrature.hpp"

namespace stratexp {

/// Post-jump belief j(p) = lambda1 p / lambda(p). j(0) = 0; with lambda0 == 0
/// every p > 0 jumps to 1; when lambda(p) == 0 the belief does not move.
double jump_posterior(const Model& model, double p);

double log_odds(double p);
/// Inverse of log_odds without overflow for large |l|.
double logistic(double l);

struct LogOddsMoments {
    double mean_shift = 0.0;  ///< added to the prior log odds
    double variance = 0.0;
    bool absorbing = false;   ///< lambda0 == 0 and J >= 1: the posterior is exactly 1
};

/// Conditional law of the log odds after `delta` time units with K
/// experimenters, given state theta and J lump sums:
/// mean shift -K (l1 - l0 -/+ rho/2) delta + J ln(l1/l0) (minus sign for
/// theta = 1), variance K rho delta. Requires K >= 1.
LogOddsMoments logodds_moments(const Model& model, int theta, int K, double delta, int J);

/// One-period posterior distribution for K experimenters and period length
/// delta. The state is mixed with weights (p, 1-p), the jump count is
/// Poisson(K lambda_theta delta) truncated where the tail mass falls below
/// 1e-13, and the conditional Gaussian is integrated with the 64-point
/// Gauss-Hermite rule.
class TransitionKernel {
public:
    TransitionKernel(const Model& model, int K, double delta);

    const Model& model() const noexcept { return model_; }
    int K() const noexcept { return K_; }
    double delta() const noexcept { return delta_; }
    /// Largest jump count retained (over both states).
    int jmax() const noexcept { return static_cast<int>(std::max(pmf_[0].size(), pmf_[1].size())) - 1; }
    bool degenerate() const noexcept { return K_ == 0; }

    /// Calls fn(weight, posterior) for every branch of the mixture.
    template <class F>
    void for_each_outcome(double p, F&& fn) const;

    /// E^delta_K w(p).
    template <class W>
    double expect(const W& w, double p) const {
        double acc = 0.0;
        for_each_outcome(p, [&](double weight, double post) { acc += weight * w(post); });
        return acc;
    }

    /// Sum of the branch weights at prior p (1 up to the truncated tail).
    double total_mass(double p) const;

    /// Draws theta ~ Bernoulli(p), then J and the Gaussian increment.
    double sample_posterior(double p, std::mt19937_64& rng) const;

private:
    Model model_;
    int K_;
    double delta_;
    double sd_;                           ///< sqrt(K rho delta)
    double drift_[2];                     ///< Gaussian mean shift without jumps, per state
    double jump_step_;                    ///< ln(l1/l0), 0 when l1 == l0
    std::vector<double> pmf_[2];          ///< truncated Poisson pmf per state
    const GaussHermiteRule* rule_;
};

template <class F>
void TransitionKernel::for_each_outcome(double p, F&& fn) const {
    if (K_ == 0 || p <= 0.0 || p >= 1.0) {
        fn(1.0, p);
        return;
    }
    const double l = log_odds(p);
    const double prior[2] = {1.0 - p, p};
    const bool conclusive = model_.lambda0() == 0.0;
    const auto nodes = rule_->nodes();
    const auto weights = rule_->weights();
    const double scale = std::sqrt(2.0) * sd_;
    const double norm = std::numbers::inv_sqrtpi;
    for (int theta = 0; theta < 2; ++theta) {
        const auto& pmf = pmf_[theta];
        for (std::size_t J = 0; J < pmf.size(); ++J) {
            const double base = prior[theta] * pmf[J];
            if (base == 0.0) continue;
            if (conclusive && J >= 1) {
                fn(base, 1.0);
                continue;
            }
            const double mean = l + drift_[theta] + static_cast<double>(J) * jump_step_;
            if (sd_ == 0.0) {
                fn(base, logistic(mean));
                continue;
            }
            for (std::size_t i = 0; i < nodes.size(); ++i)
                fn(base * weights[i] * norm, logistic(mean + scale * nodes[i]));
        }
    }
}

/// Finite-difference evaluation of the generator with K experimenters,
/// K [(rho/2) p^2 (1-p)^2 w'' - (l1 - l0) p (1-p) w' + lambda(p) (w(j(p)) - w(p))].
/// Diagnostic only; step h in belief units.
double generator_fd(const Model& model, int K, const std::function<double(double)>& w, double p, double h = 1e-4);

}  // namespace stratexp
