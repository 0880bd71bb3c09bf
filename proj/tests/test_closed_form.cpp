#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "stratexp/beliefs.hpp"
#include "stratexp/closed_form.hpp"
#include "support.hpp"

using namespace stratexp;

TEST_CASE("u at simple points") {
    for (double mu : {0.1, 0.36, 1.0, 4.2}) {
        CHECK(u(0.5, mu) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(u(1.0, mu) == 0.0);
    }
    CHECK(u(0.25, 1.0) == doctest::Approx(2.25).epsilon(1e-15));
    CHECK_THROWS_AS((void)u(0.0, 1.0), DomainError);
    CHECK_THROWS_AS((void)u(1.5, 1.0), DomainError);
}

TEST_CASE("u is decreasing and convex, derivatives match differences") {
    for (double mu : {0.2, 0.9, 2.5}) {
        double prev = u(0.01, mu);
        for (double p = 0.02; p < 0.995; p += 0.01) {
            const double v = u(p, mu);
            CHECK(v < prev);
            prev = v;
            CHECK(u_prime(p, mu) < 0.0);
            CHECK(u_second(p, mu) > 0.0);
            const double h = 1e-5;
            CHECK(u_prime(p, mu) == doctest::Approx((u(p + h, mu) - u(p - h, mu)) / (2 * h)).epsilon(1e-6));
            CHECK(u_second(p, mu) ==
                  doctest::Approx((u(p + h, mu) - 2 * u(p, mu) + u(p - h, mu)) / (h * h)).epsilon(1e-4));
        }
    }
}

TEST_CASE("mu roots agree with bisection") {
    const Model m(oracle::fig2());
    const auto a = oracle::prim(oracle::fig2());
    const MuRoot r1 = solve_mu(m, 1.0);
    const MuRoot r5 = solve_mu(m, 5.0);
    CHECK(r1.mu == doctest::Approx(oracle::mu(a, 1.0)).epsilon(1e-10));
    CHECK(r5.mu == doctest::Approx(oracle::mu(a, 5.0)).epsilon(1e-10));
    CHECK(r1.mu == doctest::Approx(1.4767).epsilon(1e-4));
    CHECK(r5.mu == doctest::Approx(0.360).epsilon(1e-3));
    CHECK(r1.residual <= 1e-12);
    CHECK(r5.residual <= 1e-12);
}

TEST_CASE("conclusive news root") {
    ModelParams q = oracle::fig2();
    q.lambda0 = 0.0;
    q.s = 0.5;
    const Model m(q);
    const auto a = oracle::prim(q);
    for (double x : {0.5, 1.0, 3.0, 5.0}) {
        // with lambda0 = 0 the equation is linear: lambda1 mu = r / x
        CHECK(solve_mu(m, x).mu == doctest::Approx(q.r / x / q.lambda1).epsilon(1e-10));
        CHECK(solve_mu(m, x).mu == doctest::Approx(oracle::mu(a, x)).epsilon(1e-10));
    }
}

TEST_CASE("equal intensities with brownian noise") {
    ModelParams q = oracle::fig1();
    q.lambda0 = q.lambda1;
    q.alpha1 = 0.5;
    q.s = 1.75;
    const Model m(q);
    const auto a = oracle::prim(q);
    CHECK(solve_mu(m, 2.0).mu == doctest::Approx(oracle::mu(a, 2.0)).epsilon(1e-10));
}

TEST_CASE("no learning has no root") {
    // cannot be built as a Model (m0 == m1), so use the raw-rate overload
    CHECK_THROWS_AS((void)solve_mu(0.0, 1.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS((void)solve_mu(0.0, 0.0, 0.0, 1.0), DomainError);
}

TEST_CASE("mu decreases in x and the cutoff with it") {
    oracle::ParamGen gen(3);
    for (int t = 0; t < 30; ++t) {
        const Model m(gen.any(gen.uni(0, 1) < 0.5, true));
        double prev_mu = solve_mu(m, 0.25).mu;
        double prev_p = cutoff_pstar(m, 0.25);
        for (int k = 1; k < 20; ++k) {
            const double x = 0.25 + 0.5 * k;
            const MuRoot r = solve_mu(m, x);
            CHECK(r.mu < prev_mu);
            CHECK(cutoff_pstar(m, x) < prev_p);
            CHECK(r.residual <= 1e-12);
            prev_mu = r.mu;
            prev_p = cutoff_pstar(m, x);
        }
    }
}

TEST_CASE("cutoffs for the pure poisson example") {
    const Model m(oracle::fig2());
    CHECK(cutoff_pstar(m, 5.0) == doctest::Approx(0.270).epsilon(0.001 / 0.270));
    CHECK(cutoff_pstar(m, 1.0) == doctest::Approx(0.455).epsilon(0.001 / 0.455));
}

TEST_CASE("cutoffs agree with the bisection oracle") {
    for (auto q : {oracle::fig1(), oracle::fig2()}) {
        const Model m(q);
        const auto a = oracle::prim(q);
        for (double x : {1.0, 2.0, 5.0}) {
            CHECK(cutoff_pstar(m, x) == doctest::Approx(oracle::pstar(a, oracle::mu(a, x))).epsilon(1e-10));
        }
    }
    // brownian-plus-poisson example: m1 = 1.6 places the cutoffs here
    const Model m(oracle::fig1());
    CHECK(cutoff_pstar(m, 5.0) == doctest::Approx(0.2345).epsilon(1e-3));
    CHECK(cutoff_pstar(m, 1.0) == doctest::Approx(0.4087).epsilon(1e-3));
}

TEST_CASE("cutoff ordering for random primitives") {
    oracle::ParamGen gen(5);
    for (int t = 0; t < 300; ++t) {
        const Model m(gen.any(gen.uni(0, 1) < 0.5, true, gen.uni(0, 1) < 0.2));
        const double pN = cutoff_pstar(m, m.N());
        const double p1 = cutoff_pstar(m, 1.0);
        CHECK(0.0 < pN);
        CHECK(pN < p1);
        CHECK(p1 < m.p_myopic());
    }
}

TEST_CASE("closed-form values: shape and endpoints") {
    const Model m(oracle::fig2());
    const auto vN = planner_value(m);
    const auto v1 = single_agent_value(m);
    CHECK(vN.cutoff() == doctest::Approx(cutoff_pstar(m, 5.0)).epsilon(1e-14));
    for (double p = 0.0; p <= vN.cutoff(); p += 0.01) CHECK(vN(p) == m.s());
    CHECK(vN(1.0) == doctest::Approx(m.m1()).epsilon(1e-15));
    CHECK(v1(1.0) == doctest::Approx(m.m1()).epsilon(1e-15));
    CHECK(vN(vN.cutoff() + 1e-9) == doctest::Approx(m.s()).epsilon(1e-8));
    // increasing and convex above the cutoff
    double prev = vN(vN.cutoff());
    for (double p = vN.cutoff() + 0.01; p <= 1.0; p += 0.01) {
        CHECK(vN(p) > prev);
        prev = vN(p);
        CHECK(vN.d2(p) > 0.0);
    }
}

TEST_CASE("closed-form values match the oracle formula") {
    for (auto q : {oracle::fig1(), oracle::fig2()}) {
        const Model m(q);
        const auto a = oracle::prim(q);
        const double muN = oracle::mu(a, q.N);
        const double mu1 = oracle::mu(a, 1);
        const auto vN = planner_value(m);
        const auto v1 = single_agent_value(m);
        const auto v4 = cutoff_policy_value(m, 0.4);
        for (double p = 0.0; p <= 1.0; p += 0.01) {
            CHECK(vN(p) == doctest::Approx(oracle::cutoff_value(a, muN, oracle::pstar(a, muN), p)).epsilon(1e-9));
            CHECK(v1(p) == doctest::Approx(oracle::cutoff_value(a, mu1, oracle::pstar(a, mu1), p)).epsilon(1e-9));
            CHECK(v4(p) == doctest::Approx(oracle::cutoff_value(a, muN, 0.4, p)).epsilon(1e-9));
        }
    }
}

TEST_CASE("payoff ordering around the threshold policy") {
    const Model m(oracle::fig2());
    const double phat = 0.39868960;  // threshold for these primitives
    const auto vN = planner_value(m);
    const auto v1 = single_agent_value(m);
    const auto vh = cutoff_policy_value(m, phat);
    CHECK_FALSE(vh.outside_domain());
    for (int i = 0; i <= 1000; ++i) {
        const double p = i / 1000.0;
        CHECK(v1(p) <= vh(p) + 1e-12);
        CHECK(vh(p) <= vN(p) + 1e-12);
        if (p > phat && p < 1.0) {
            CHECK(vh(p) < vN(p));
            CHECK(v1(p) < vh(p));
        }
    }
}

TEST_CASE("cutoff policy below the planner cutoff is flagged") {
    const Model m(oracle::fig2());
    CHECK(cutoff_policy_value(m, 0.1).outside_domain());
    CHECK_FALSE(cutoff_policy_value(m, 0.3).outside_domain());
    CHECK_THROWS_AS((void)cutoff_policy_value(m, 0.0), ValidationError);
}

TEST_CASE("cutoff policy at the planner cutoff is the planner value") {
    const Model m(oracle::fig1());
    const auto vN = planner_value(m);
    const auto vc = cutoff_policy_value(m, vN.cutoff());
    for (double p = 0.0; p <= 1.0; p += 0.01) CHECK(vc(p) == doctest::Approx(vN(p)).epsilon(1e-13));
}

TEST_CASE("convex kink at the cutoff") {
    const Model m(oracle::fig2());
    for (double c : {0.3, 0.4, 0.45}) {
        const auto v = cutoff_policy_value(m, c);
        CHECK(v.d1(c) == 0.0);
        CHECK(v.right_slope_at_cutoff() > 0.0);
    }
}

TEST_CASE("informational benefit of a constant vanishes") {
    const Model m(oracle::fig1());
    const AnalyticFunction one{[](double) { return 3.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
    for (double p = 0.05; p < 1.0; p += 0.05) CHECK(informational_benefit(m, p, one) == 0.0);
}

TEST_CASE("benefit of u equals u over N") {
    // The generator maps u(.; mu_N) to (r/N) u, i.e. b(p, u) = u / N.
    for (auto q : {oracle::fig1(), oracle::fig2()}) {
        const Model m(q);
        const double muN = solve_mu(m, q.N).mu;
        const AnalyticFunction uf{[&](double p) { return u(p, muN); }, [&](double p) { return u_prime(p, muN); },
                                  [&](double p) { return u_second(p, muN); }};
        for (double p = 0.02; p < 0.99; p += 0.01) {
            const double b = informational_benefit(m, p, uf);
            CHECK(std::abs(b - u(p, muN) / q.N) <= 1e-8 * std::max(1.0, u(p, muN)));
        }
    }
}

TEST_CASE("planner value solves the HJB equation") {
    oracle::ParamGen gen(21);
    std::vector<ModelParams> cases{oracle::fig1(), oracle::fig2()};
    for (int t = 0; t < 10; ++t) cases.push_back(gen.any(gen.uni(0, 1) < 0.5, true));
    for (const auto& q : cases) {
        const Model m(q);
        const auto vN = planner_value(m);
        for (int i = 1; i < 1000; ++i) {
            const double p = i / 1000.0;
            if (std::abs(p - vN.cutoff()) < 1e-3) continue;
            const double b = informational_benefit(m, p, vN);
            const double rhs = m.s() + std::max(0.0, q.N * b - m.c(p));
            CHECK(std::abs(vN(p) - rhs) < 1e-7);
        }
    }
}

TEST_CASE("single-agent value solves its HJB equation") {
    const Model m(oracle::fig1());
    const auto v1 = single_agent_value(m);
    for (int i = 1; i < 1000; ++i) {
        const double p = i / 1000.0;
        if (std::abs(p - v1.cutoff()) < 1e-3) continue;
        const double rhs = m.s() + std::max(0.0, informational_benefit(m, p, v1) - m.c(p));
        CHECK(std::abs(v1(p) - rhs) < 1e-7);
    }
}
