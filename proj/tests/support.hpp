// Test-side reference computations. Written from the model definitions only;
// nothing here calls into the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>

#include "stratexp/model.hpp"

namespace oracle {

inline stratexp::ModelParams fig1() { return {1, 1, 1, 0, 0.1, 1.5, 0.2, 1, 5}; }
inline stratexp::ModelParams fig2() { return {1, 1, 1, 0, 0, 1.5, 0.2, 1, 5}; }
inline stratexp::ModelParams fig4() { return {1, 2, 1, 1.5, 2.5, 0, 0, 0, 5}; }

/// Plain bisection; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct Prim {
    double r, s, rho, l0, l1, m0, m1;
};

inline Prim prim(const stratexp::ModelParams& q) {
    const double da = q.alpha1 - q.alpha0;
    return {q.r, q.s, da * da / (q.sigma * q.sigma), q.lambda0, q.lambda1, q.alpha0 + q.lambda0 * q.h,
            q.alpha1 + q.lambda1 * q.h};
}

inline double mu_f(const Prim& a, double mu, double x) {
    double pw = 1.0;
    if (a.l0 == 0.0)
        pw = 0.0;
    else if (a.l1 != a.l0)
        pw = std::pow(a.l0 / a.l1, mu);
    return 0.5 * a.rho * mu * (mu + 1.0) + (a.l1 - a.l0) * mu + a.l0 * pw - a.l0 - a.r / x;
}

inline double mu(const Prim& a, double x) {
    double hi = 1.0;
    while (mu_f(a, hi, x) < 0.0) hi *= 2.0;
    return bisect([&](double m) { return mu_f(a, m, x); }, 0.0, hi);
}

inline double pstar(const Prim& a, double mu) {
    return mu * (a.s - a.m0) / ((mu + 1.0) * (a.m1 - a.s) + mu * (a.s - a.m0));
}

inline double u(double p, double mu) { return (1.0 - p) * std::pow((1.0 - p) / p, mu); }

inline double m(const Prim& a, double p) { return p * a.m1 + (1.0 - p) * a.m0; }

/// s below the cutoff, m + C u above it, C fixed by continuity.
inline double cutoff_value(const Prim& a, double mu, double cut, double p) {
    if (p <= cut) return a.s;
    return m(a, p) + (a.s - m(a, cut)) / u(cut, mu) * u(p, mu);
}

inline double jump(const Prim& a, double p) {
    const double lam = p * a.l1 + (1.0 - p) * a.l0;
    return lam > 0.0 ? a.l1 * p / lam : p;
}

/// lambda(p)[N V_{N,p}(j) - (N-1) V_1^*(j) - s] - r c(p), pure Poisson.
inline double threshold_gap(const Prim& a, int N, double p) {
    const double muN = mu(a, N);
    const double mu1 = mu(a, 1);
    const double p1 = pstar(a, mu1);
    const double jp = jump(a, p);
    const double lam = p * a.l1 + (1.0 - p) * a.l0;
    return lam * (N * cutoff_value(a, muN, p, jp) - (N - 1) * cutoff_value(a, mu1, p1, jp) - a.s) -
           a.r * (a.s - m(a, p));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Random valid primitives for property tests.
class ParamGen {
public:
    explicit ParamGen(std::uint64_t seed) : rng_(seed) {}

    double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }

    /// General Levy case; brownian and poisson control which parts are informative.
    stratexp::ModelParams any(bool brownian, bool poisson, bool conclusive = false) {
        stratexp::ModelParams q;
        q.r = uni(0.2, 3.0);
        q.sigma = uni(0.3, 2.0);
        q.h = uni(0.3, 2.5);
        q.alpha0 = uni(-0.5, 0.5);
        q.alpha1 = brownian ? q.alpha0 + uni(0.05, 1.0) : q.alpha0;
        q.lambda1 = poisson ? uni(0.3, 2.0) : 0.0;
        q.lambda0 = poisson ? (conclusive ? 0.0 : q.lambda1 * uni(0.1, 0.8)) : 0.0;
        const double m0 = q.alpha0 + q.lambda0 * q.h;
        const double m1 = q.alpha1 + q.lambda1 * q.h;
        q.s = m0 + (m1 - m0) * uni(0.2, 0.8);
        q.N = integer(2, 8);
        return q;
    }

    stratexp::ModelParams pure_poisson(bool conclusive = false) { return any(false, true, conclusive); }

private:
    std::mt19937_64 rng_;
};

}  // namespace oracle
