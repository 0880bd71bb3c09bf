#include "stratexp/thresholds.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "stratexp/beliefs.hpp"
#include "stratexp/closed_form.hpp"

namespace stratexp {

namespace {

constexpr double kPhatTolerance = 1e-10;
constexpr double kBracketInset = 1e-12;

template <class F>
std::pair<double, double> refine(F f, double lo, double hi, double flo, double fhi, double width) {
    std::uintmax_t iters = 200;
    auto tol = [width](double a, double b) { return std::abs(b - a) <= width; };
    return boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
}

}  // namespace

std::string_view regime_name(Regime regime) {
    switch (regime) {
        case Regime::brownian: return "brownian";
        case Regime::poisson_interior: return "poisson-interior";
        case Regime::poisson_corner_pNstar: return "poisson-corner-pNstar";
        case Regime::poisson_corner_p1star: return "poisson-corner-p1star";
    }
    return "unknown";
}

double threshold_gap(const Model& model, double p) {
    if (!model.pure_poisson()) throw ValidationError("threshold_gap is defined for pure Poisson learning (rho == 0)");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("threshold_gap requires p in (0, 1)");
    const double jp = jump_posterior(model, p);
    const ClosedFormValue vn = cutoff_policy_value(model, p);
    const ClosedFormValue v1 = single_agent_value(model);
    const int N = model.N();
    return model.lambda(p) * (N * vn(jp) - (N - 1) * v1(jp) - model.s()) - model.r() * model.c(p);
}

ThresholdResult solve_phat(const Model& model) {
    if (model.N() < 2) throw ValidationError("solve_phat requires N >= 2");
    ThresholdResult res{};
    res.pN_star = cutoff_pstar(model, model.N());
    res.p1_star = cutoff_pstar(model, 1.0);
    res.j_pN_star = jump_posterior(model, res.pN_star);
    if (!model.pure_poisson()) {
        res.phat = res.pN_star;
        res.regime = Regime::brownian;
        return res;
    }
    if (model.conclusive_news()) {
        res.phat = res.p1_star;
        res.regime = Regime::poisson_corner_p1star;
        res.f_residual = threshold_gap(model, res.phat);
        return res;
    }
    if (res.j_pN_star <= res.p1_star) {
        res.phat = res.pN_star;
        res.regime = Regime::poisson_corner_pNstar;
        res.f_residual = threshold_gap(model, res.phat);
        return res;
    }
    const double lo = res.pN_star + kBracketInset;
    const double hi = res.p1_star - kBracketInset;
    auto f = [&](double p) { return threshold_gap(model, p); };
    const double flo = f(lo);
    const double fhi = f(hi);
    if (!(flo < 0.0 && fhi > 0.0))
        throw ConvergenceError("solve_phat: root not bracketed on [" + std::to_string(lo) + ", " +
                                   std::to_string(hi) + "] (f = " + std::to_string(flo) + ", " +
                                   std::to_string(fhi) + ")",
                               std::min(std::abs(flo), std::abs(fhi)), 0);
    const auto [a, b] = refine(f, lo, hi, flo, fhi, kPhatTolerance);
    const double fa = f(a);
    const double fb = f(b);
    res.phat = std::abs(fa) <= std::abs(fb) ? a : b;
    res.f_residual = std::abs(fa) <= std::abs(fb) ? fa : fb;
    res.regime = Regime::poisson_interior;
    return res;
}

std::vector<PhatScanRow> phat_scan(const Model& model, const std::vector<int>& players) {
    std::vector<PhatScanRow> rows;
    rows.reserve(players.size());
    for (int n : players) rows.push_back({n, solve_phat(model.with_players(n))});
    return rows;
}

double efficiency_q(double x, double beta, int N) {
    if (!(x > 0.0)) throw ValidationError("efficiency_q: x must be positive");
    if (!(beta >= 0.0 && beta < 1.0)) throw ValidationError("efficiency_q: beta must lie in [0, 1)");
    if (N < 1) throw ValidationError("efficiency_q: N must be positive");
    const double muN = solve_mu(0.0, 1.0, beta, x / N).mu;
    const double mu1 = solve_mu(0.0, 1.0, beta, x).mu;
    return beta * (1.0 + 1.0 / muN) / (1.0 + 1.0 / mu1);
}

EfficiencyCurvePoint efficiency_point(double beta, double r, int N) {
    if (!(r > 0.0)) throw ValidationError("efficiency_point: r must be positive");
    if (N < 2) throw ValidationError("efficiency_point: N must be at least 2");
    if (!(beta > 0.0 && beta < 1.0)) throw ValidationError("efficiency_point: beta must lie in (0, 1)");
    EfficiencyCurvePoint pt;
    pt.beta = beta;
    if (beta * N <= 1.0) return pt;
    auto g = [&](double x) { return efficiency_q(x, beta, N) - 1.0; };
    double lo = 1e-6;
    double glo = g(lo);
    if (!(glo > 0.0)) throw ConvergenceError("efficiency_point: q(1e-6) does not exceed 1", glo, 0);
    double hi = 1.0;
    double ghi = g(hi);
    int doublings = 0;
    while (ghi >= 0.0) {
        lo = hi;
        glo = ghi;
        hi *= 2.0;
        ghi = g(hi);
        if (++doublings > 200) throw ConvergenceError("efficiency_point: failed to bracket q = 1", ghi, doublings);
    }
    const auto [a, b] = refine(g, lo, hi, glo, ghi, 1e-15 * hi);
    const double x = std::abs(g(a)) <= std::abs(g(b)) ? a : b;
    pt.x_star = x;
    pt.lambda1_star = r / x;
    pt.lambda0_star = beta * r / x;
    pt.q_residual = std::abs(g(x));
    return pt;
}

std::vector<EfficiencyCurvePoint> efficiency_curve(const std::vector<double>& betas, double r, int N) {
    std::vector<EfficiencyCurvePoint> out;
    out.reserve(betas.size());
    for (double b : betas) out.push_back(efficiency_point(b, r, N));
    return out;
}

}  // namespace stratexp
