#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "stratexp/model.hpp"

namespace stratexp {

enum class Regime { brownian, poisson_interior, poisson_corner_pNstar, poisson_corner_p1star };

std::string_view regime_name(Regime regime);

struct ThresholdResult {
    double phat;
    Regime regime;
    double f_residual;  ///< threshold_gap(phat); 0 by definition on the brownian branch
    double pN_star;
    double p1_star;
    double j_pN_star;   ///< j(p_N^*)
};

/// lambda(p)[N V_{N,p}(j(p)) - (N-1) V_1^*(j(p)) - s] - r c(p). Pure Poisson
/// learning only (throws ValidationError when rho > 0); p in (0, 1).
double threshold_gap(const Model& model, double p);

/// Limit SSE experimentation threshold. Requires N >= 2.
ThresholdResult solve_phat(const Model& model);

struct PhatScanRow {
    int N;
    ThresholdResult result;
};
std::vector<PhatScanRow> phat_scan(const Model& model, const std::vector<int>& players);

/// q(x; beta) = beta (1 + 1/mu_N) / (1 + 1/mu_1) with x = r / lambda1 and
/// lambda0 = beta lambda1.
double efficiency_q(double x, double beta, int N);

struct EfficiencyCurvePoint {
    double beta;
    std::optional<double> x_star;  ///< empty when beta <= 1/N
    double lambda1_star = 0.0;
    double lambda0_star = 0.0;
    double q_residual = 0.0;       ///< |q(x_star) - 1|
};

EfficiencyCurvePoint efficiency_point(double beta, double r, int N);
std::vector<EfficiencyCurvePoint> efficiency_curve(const std::vector<double>& betas, double r, int N);

}  // namespace stratexp
