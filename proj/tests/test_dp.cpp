#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "stratexp/closed_form.hpp"
#include "stratexp/dp.hpp"
#include "stratexp/thresholds.hpp"
#include "support.hpp"

using namespace stratexp;

namespace {

double sup_gap(const BeliefGridFn& w, const ClosedFormValue& v) {
    double g = 0.0;
    for (std::size_t i = 0; i < w.grid().size(); ++i) g = std::max(g, std::abs(w[i] - v(w.grid()[i])));
    return g;
}

double fig1_mid_cutoff(const Model& m) { return 0.5 * (cutoff_pstar(m, m.N()) + cutoff_pstar(m, 1)); }

}  // namespace

TEST_CASE("belief grid") {
    const auto g = BeliefGrid::uniform(11);
    CHECK(g.size() == 11);
    CHECK(g[0] == 0.0);
    CHECK(g[10] == 1.0);
    CHECK(g.cell(0.35) == 3);
    CHECK(g.cell(1.0) == 9);
    CHECK(g.find(0.3) < g.size());
    CHECK(g.find(0.35) == g.size());
    const double extra[] = {0.35, 0.3 + 1e-14};
    const auto h = BeliefGrid::uniform(11, extra);
    CHECK(h.size() == 12);
    CHECK(h.find(0.35) == 4);
    CHECK_THROWS_AS(BeliefGrid({0.0, 0.5, 0.5, 1.0}), ValidationError);
    CHECK_THROWS_AS(BeliefGrid({0.1, 1.0}), ValidationError);

    const BeliefGridFn f(g, std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    CHECK(f(0.35) == doctest::Approx(3.5));
    CHECK(f(-1.0) == 0.0);
    CHECK(f(2.0) == 10.0);
}

TEST_CASE("default grid carries the cutoff nodes") {
    for (const auto& q : {oracle::fig1(), oracle::fig2()}) {
        const Model m(q);
        const double extra[] = {0.123456};
        const auto g = default_grid(m, 2001, extra);
        CHECK(g.find(cutoff_pstar(m, m.N())) < g.size());
        CHECK(g.find(cutoff_pstar(m, 1)) < g.size());
        CHECK(g.find(m.p_myopic()) < g.size());
        CHECK(g.find(solve_phat(m).phat) < g.size());
        CHECK(g.find(0.123456) < g.size());
        for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
    }
}

TEST_CASE("expectation matrix is row stochastic and preserves the mean") {
    for (const auto& q : {oracle::fig1(), oracle::fig2(), oracle::fig4()}) {
        const Model m(q);
        const DpContext ctx(m, 0.1, default_grid(m, 501));
        const auto& g = ctx.grid();
        const std::vector<double> ones(g.size(), 1.0);
        const std::vector<double> id(g.nodes().begin(), g.nodes().end());
        for (int K = 0; K <= q.N; ++K) {
            const auto e1 = ctx.expect(K, ones);
            const auto ep = ctx.expect(K, id);
            const TransitionKernel k(m, K, 0.1);
            for (std::size_t i = 0; i < g.size(); ++i) {
                CHECK(e1[i] == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(std::abs(ep[i] - g[i]) < 1e-8);
            }
            // interpolation of a convex function overestimates the exact expectation
            std::vector<double> sq(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) sq[i] = g[i] * g[i];
            const auto es = ctx.expect(K, sq);
            for (std::size_t i = 0; i < g.size(); i += 25) {
                const double exact = k.expect([](double x) { return x * x; }, g[i]);
                CHECK(es[i] >= exact - 1e-12);
                CHECK(es[i] - exact < 1e-5);
            }
        }
    }
}

TEST_CASE("fixed points contract at the discount rate") {
    const Model m(oracle::fig1());
    for (double delta : {0.4, 0.1}) {
        const DpContext ctx(m, delta, default_grid(m, 501));
        const double d = ctx.discount();
        const auto w1 = single_agent_value(ctx);
        const auto wb = reward_fixed_point(ctx, fig1_mid_cutoff(m));
        const auto wl = punishment_fixed_point(ctx, 0.98);
        for (const auto* r : {&w1, &wb, &wl}) {
            CHECK(r->max_ratio <= d + 1e-6);
            CHECK(r->residual < (1 - d) * 1e-8);
        }
    }
}

TEST_CASE("operators are monotone") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (const auto& q : {oracle::fig1(), oracle::fig2()}) {
        const Model m(q);
        const DpContext ctx(m, 0.1, default_grid(m, 201));
        const std::size_t n = ctx.grid().size();
        for (int t = 0; t < 20; ++t) {
            std::vector<double> v(n), w(n);
            for (std::size_t i = 0; i < n; ++i) {
                v[i] = m.m0() + (m.m1() - m.m0()) * U(rng);
                w[i] = v[i] + 0.5 * U(rng);
            }
            const double pl = 0.2 + 0.5 * U(rng);
            const double ph = pl + (1 - pl) * U(rng);
            auto check = [&](const std::vector<double>& a, const std::vector<double>& b) {
                for (std::size_t i = 0; i < n; ++i) CHECK(a[i] <= b[i] + 1e-14);
            };
            check(apply_single_agent(ctx, v), apply_single_agent(ctx, w));
            check(apply_reward(ctx, pl, v), apply_reward(ctx, pl, w));
            check(apply_punishment(ctx, ph, v), apply_punishment(ctx, ph, w));
        }
    }
}

TEST_CASE("single agent value") {
    const Model m(oracle::fig1());
    const auto v1 = single_agent_value(m);
    double prev = 1e9;
    for (double delta : {0.4, 0.2, 0.1, 0.05}) {
        const DpContext ctx(m, delta, default_grid(m, 2001));
        const auto w = single_agent_value(ctx);
        for (std::size_t i = 0; i < ctx.grid().size(); ++i) CHECK(w.value[i] <= v1(ctx.grid()[i]) + 1e-6);
        // safe is absorbing near p = 0
        CHECK(w.value[0] == m.s());
        CHECK(w.value[1] == m.s());
        REQUIRE(w.cutoff.has_value());
        CHECK(*w.cutoff >= v1.cutoff() - 1e-3);
        for (std::size_t i = 0; ctx.grid()[i] < *w.cutoff; ++i) CHECK(w.action[i] == 0);
        const double gap = sup_gap(w.value, v1);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 0.02);
}

TEST_CASE("reward value") {
    const Model m(oracle::fig1());
    const double pl = fig1_mid_cutoff(m);
    const auto vn = cutoff_policy_value(m, pl);
    const double extra[] = {pl};
    for (double delta : {0.05, 0.02}) {
        const DpContext ctx(m, delta, default_grid(m, 2001, extra));
        const auto w = reward_fixed_point(ctx, pl);
        for (std::size_t i = 0; i < ctx.grid().size(); ++i) {
            const double p = ctx.grid()[i];
            CHECK(w.value[i] >= vn(p) - 1e-6);
            if (p <= pl) CHECK(w.value[i] == m.s());
            CHECK(w.action[i] == (p > pl ? 1 : 0));
        }
        CHECK(w.value[ctx.grid().size() - 1] == doctest::Approx(m.m1()).epsilon(1e-8));
    }

    const Model m4(oracle::fig4());
    const DpContext ctx4(m4, 0.1, default_grid(m4, 501));
    const auto w4 = reward_fixed_point(ctx4, 0.4);
    for (std::size_t i = 0; ctx4.grid()[i] <= 0.4; ++i) CHECK(w4.value[i] == m4.s());
    CHECK_THROWS_AS(reward_fixed_point(ctx4, 1.0), ValidationError);
}

TEST_CASE("punishment value has a flat safe region") {
    const Model m(oracle::fig1());
    const auto v1 = single_agent_value(m);
    const DpContext ctx(m, 0.02, default_grid(m, 2001));
    const auto w = punishment_fixed_point(ctx, 0.98);
    CHECK(w.value[0] == m.s());
    std::size_t flat = 0;
    while (flat < ctx.grid().size() && w.value[flat] == m.s()) ++flat;
    CHECK(flat > 1);
    CHECK(ctx.grid()[flat] > 0.1);
    for (std::size_t i = 0; i < flat; ++i) CHECK(w.action[i] == 0);
    // the deviator's payoff sits between the single-agent and free-riding values
    for (std::size_t i = 0; i < ctx.grid().size(); ++i) CHECK(w.value[i] >= v1(ctx.grid()[i]) - 0.01);
}

TEST_CASE("punishment value approaches the single-agent value as p_high rises") {
    const Model m(oracle::fig1());
    const auto v1 = single_agent_value(m);
    const DpContext ctx(m, 0.05, default_grid(m, 1001));
    double found = 0.0;
    for (double ph = 0.9; ph < 0.9999; ph = 1 - (1 - ph) / 2) {
        const auto w = punishment_fixed_point(ctx, ph);
        double excess = -1.0;
        for (std::size_t i = 0; i < ctx.grid().size(); ++i) excess = std::max(excess, w.value[i] - v1(ctx.grid()[i]));
        if (excess <= 0.01) {
            found = ph;
            break;
        }
    }
    CHECK(found > 0.0);
    CHECK_THROWS_AS(punishment_fixed_point(ctx, 0.0), ValidationError);
}

TEST_CASE("pure poisson punishment values form a Cauchy sequence in the period length") {
    const Model m(oracle::fig2());
    const double extra[] = {0.9};
    const auto grid = default_grid(m, 2001, extra);
    std::vector<BeliefGridFn> ws;
    for (double delta : {0.4, 0.2, 0.1, 0.05}) ws.push_back(punishment_fixed_point(DpContext(m, delta, grid), 0.9).value);
    double prev = 1e9;
    for (std::size_t k = 1; k < ws.size(); ++k) {
        const double d = sup_distance(ws[k], ws[k - 1]);
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("punishment operator with inert opponents is consistent to first order") {
    // ||T v - v|| / delta -> 0 for the closed-form single-agent value
    const Model m(oracle::fig1());
    const auto v1 = single_agent_value(m);
    const auto grid = default_grid(m, 4001);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = v1(grid[i]);
    double prev = 1e9;
    for (double delta : {0.2, 0.1, 0.05, 0.02}) {
        const DpContext ctx(m, delta, grid);
        const auto tv = apply_punishment(ctx, 1.0, v);
        double g = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) g = std::max(g, std::abs(tv[i] - v[i]));
        CHECK(g / delta < prev);
        prev = g / delta;
    }
    CHECK(prev < 0.01);
}

TEST_CASE("figure 4 frontier") {
    const Model m(oracle::fig4());
    const auto v1 = single_agent_value(m);
    const auto vn = planner_value(m);
    const DpContext ctx(m, 0.1, default_grid(m, 2001));
    const auto fr = sse_value_iteration(ctx);
    const auto& g = ctx.grid();
    REQUIRE(fr.converged);
    CHECK(fr.residual < 1e-7);
    REQUIRE(fr.p_low_jump.has_value());
    REQUIRE(fr.p_high_jump.has_value());
    const double pl = *fr.p_low_jump, ph = *fr.p_high_jump;
    CHECK(pl < ph);
    CHECK(std::count(fr.fallback.begin(), fr.fallback.end(), 1) == 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(fr.wlow[i] <= fr.wbar[i] + 1e-9);
        CHECK(fr.wbar[i] <= vn(g[i]) + 1e-6);
        if (g[i] > pl && g[i] < ph) CHECK((fr.enforceable0[i] && fr.enforceable1[i]));
        if (g[i] < pl - 0.01) CHECK((fr.enforceable0[i] && !fr.enforceable1[i]));
        if (g[i] > 0.99) CHECK((!fr.enforceable0[i] && fr.enforceable1[i]));
    }
    // dip below the single-agent value just right of p_1*
    const double p1 = cutoff_pstar(m, 1);
    bool dip = false;
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i] > p1 && g[i] < p1 + 0.1 && fr.wlow[i] < v1(g[i]) - 1e-9) dip = true;
    CHECK(dip);

    // re-evaluating the right-hand sides reproduces the pair
    const auto st = sse_step(ctx, fr.wbar.values(), fr.wlow.values());
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(std::abs(st.wbar[i] - fr.wbar[i]) < 1e-6);
        CHECK(std::abs(st.wlow[i] - fr.wlow[i]) < 1e-6);
    }

    const auto th = detect_thresholds(fr);
    CHECK(th.p_low == fr.p_low_jump);
    CHECK(th.p_high == fr.p_high_jump);
    CHECK(th.from_enforceability == fr.thresholds_from_enforceability);
}

TEST_CASE("jump detection on a synthetic frontier") {
    const auto g = BeliefGrid::uniform(101);
    std::vector<double> bar(101), low(101);
    for (std::size_t i = 0; i < 101; ++i) {
        bar[i] = 1.0 + 0.001 * i + (g[i] > 0.305 ? 0.5 : 0.0);
        low[i] = 1.0 + 0.001 * i + (g[i] > 0.705 ? 0.3 : 0.0);
    }
    SseFrontier fr{BeliefGridFn(g, bar), BeliefGridFn(g, low), std::vector<unsigned char>(101, 1),
                   std::vector<unsigned char>(101, 1), std::vector<unsigned char>(101, 0), 0, 0.0, true, {}, {}, {},
                   false};
    const auto th = detect_thresholds(fr);
    CHECK_FALSE(th.from_enforceability);
    CHECK(*th.p_low == doctest::Approx(0.305));
    CHECK(*th.p_high == doctest::Approx(0.705));

    // no jumps: thresholds come from the enforceability map
    for (std::size_t i = 0; i < 101; ++i) {
        fr.wbar.mutable_values()[i] = 1.0 + 0.001 * i;
        fr.wlow.mutable_values()[i] = 1.0 + 0.001 * i;
        fr.enforceable1[i] = g[i] > 0.2;
        fr.enforceable0[i] = g[i] < 0.8;
    }
    const auto th2 = detect_thresholds(fr);
    CHECK(th2.from_enforceability);
    REQUIRE(th2.p_low.has_value());
    REQUIRE(th2.p_high.has_value());
    CHECK(*th2.p_low < *th2.p_high);
    CHECK(std::abs(*th2.p_low - 0.2) <= 0.011);
    CHECK(std::abs(*th2.p_high - 0.8) <= 0.011);
}

TEST_CASE("pure poisson frontier thresholds approach p-hat") {
    const Model m(oracle::fig2());
    const double phat = solve_phat(m).phat;
    double prev = 1.0;
    for (double delta : {0.1, 0.05, 0.02}) {
        const DpContext ctx(m, delta, default_grid(m, 2001));
        const auto fr = sse_value_iteration(ctx);
        REQUIRE(fr.converged);
        REQUIRE(fr.p_low_jump.has_value());
        CHECK(*fr.p_low_jump < prev);
        CHECK(*fr.p_low_jump > phat - 0.005);
        prev = *fr.p_low_jump;
    }
    CHECK(std::abs(prev - phat) < 0.02);
}

TEST_CASE("iteration reports non-convergence without throwing") {
    const Model m(oracle::fig4());
    const DpContext ctx(m, 0.1, default_grid(m, 201));
    SseOptions opt;
    opt.max_iterations = 5;
    const auto fr = sse_value_iteration(ctx, opt);
    CHECK_FALSE(fr.converged);
    CHECK(fr.iterations == 5);
    CHECK(fr.residual > 0.0);

    IterationOptions io;
    io.max_iterations = 3;
    CHECK_THROWS_AS(single_agent_value(ctx, io), ConvergenceError);
}

TEST_CASE("iteration is deterministic") {
    const Model m(oracle::fig2());
    const DpContext a(m, 0.1, default_grid(m, 501));
    const DpContext b(m, 0.1, default_grid(m, 501));
    const auto fa = sse_value_iteration(a);
    const auto fb = sse_value_iteration(b);
    CHECK(fa.iterations == fb.iterations);
    for (std::size_t i = 0; i < a.grid().size(); ++i) {
        CHECK(fa.wbar[i] == fb.wbar[i]);
        CHECK(fa.wlow[i] == fb.wlow[i]);
    }
}
