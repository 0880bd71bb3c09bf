#include "stratexp/dp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stratexp/closed_form.hpp"
#include "stratexp/thresholds.hpp"

namespace stratexp {

namespace {

constexpr double kRatioFloor = 1e-10;
constexpr double kIcSlack = 1e-12;

double sup_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

template <class Apply>
FixedPointResult iterate(const DpContext& ctx, const IterationOptions& opt, Apply apply, const char* name) {
    const double stop = (1.0 - ctx.discount()) * opt.tolerance;
    std::vector<double> w(ctx.grid().size(), ctx.model().s());
    std::vector<int> action;
    double prev = 0.0;
    FixedPointResult out{BeliefGridFn(ctx.grid(), ctx.model().s()), {}, 0, 0.0, 0.0, std::nullopt};
    for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
        std::vector<double> next = apply(w, &action);
        const double diff = sup_diff(next, w);
        if (it > 1 && prev > kRatioFloor) out.max_ratio = std::max(out.max_ratio, diff / prev);
        prev = diff;
        w = std::move(next);
        out.iterations = it;
        out.residual = diff;
        if (diff < stop) {
            out.value = BeliefGridFn(ctx.grid(), std::move(w));
            out.action = std::move(action);
            return out;
        }
    }
    throw ConvergenceError(std::string(name) + ": iteration cap reached", out.residual, out.iterations);
}

}  // namespace

DpContext::DpContext(const Model& model, double delta, BeliefGrid grid)
    : model_(model), delta_(delta), discount_(model.discount(delta)), grid_(std::move(grid)),
      matrices_(static_cast<std::size_t>(model.N()) + 1) {}

const ExpectationMatrix& DpContext::matrix(int K) const {
    if (K < 0 || K > model_.N()) throw ValidationError("expectation matrix: K out of range");
    auto& slot = matrices_[static_cast<std::size_t>(K)];
    if (!slot) slot = std::make_unique<ExpectationMatrix>(TransitionKernel(model_, K, delta_), grid_);
    return *slot;
}

std::vector<double> DpContext::expect(int K, std::span<const double> w) const {
    std::vector<double> out(w.size());
    if (K == 0) {
        std::copy(w.begin(), w.end(), out.begin());
        return out;
    }
    matrix(K).apply(w, out);
    return out;
}

BeliefGrid default_grid(const Model& model, std::size_t n, std::span<const double> extra) {
    std::vector<double> cuts(extra.begin(), extra.end());
    cuts.push_back(model.p_myopic());
    if (!model.no_learning()) {
        cuts.push_back(cutoff_pstar(model, model.N()));
        cuts.push_back(cutoff_pstar(model, 1.0));
        if (model.N() >= 2) cuts.push_back(solve_phat(model).phat);
    }
    // Values behave like (1-p)^(mu+1) at the top, with mu possibly below 1; halve
    // the last cell repeatedly so interpolation there stays accurate.
    if (n >= 2) {
        const double h = 1.0 / static_cast<double>(n - 1);
        for (int k = 1; k <= 8; ++k) cuts.push_back(1.0 - std::ldexp(h, -k));
    }
    std::sort(cuts.begin(), cuts.end());
    return BeliefGrid::uniform(n, cuts);
}

std::vector<double> apply_single_agent(const DpContext& ctx, std::span<const double> w, std::vector<int>* action) {
    const Model& m = ctx.model();
    const double d = ctx.discount();
    const auto& grid = ctx.grid();
    const auto e1 = ctx.expect(1, w);
    std::vector<double> out(w.size());
    if (action) action->assign(w.size(), 0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double risky = (1.0 - d) * m.m(grid[i]) + d * e1[i];
        const double safe = m.s() + d * (w[i] - m.s());
        out[i] = std::max(risky, safe);
        if (action) (*action)[i] = risky > safe ? 1 : 0;
    }
    return out;
}

std::vector<double> apply_reward(const DpContext& ctx, double p_low, std::span<const double> w) {
    const Model& m = ctx.model();
    const double d = ctx.discount();
    const auto& grid = ctx.grid();
    const auto eN = ctx.expect(m.N(), w);
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        out[i] = grid[i] > p_low ? (1.0 - d) * m.m(grid[i]) + d * eN[i] : m.s() + d * (w[i] - m.s());
    return out;
}

std::vector<double> apply_punishment(const DpContext& ctx, double p_high, std::span<const double> w,
                                     std::vector<int>* action) {
    const Model& m = ctx.model();
    const int N = m.N();
    const double d = ctx.discount();
    const auto& grid = ctx.grid();
    const auto e1 = ctx.expect(1, w);
    const auto eNm1 = ctx.expect(N - 1, w);
    const auto eN = ctx.expect(N, w);
    std::vector<double> out(w.size());
    if (action) action->assign(w.size(), 0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const bool others = grid[i] > p_high;
        const double risky = (1.0 - d) * m.m(grid[i]) + d * (others ? eN[i] : e1[i]);
        const double safe = others ? (1.0 - d) * m.s() + d * eNm1[i] : m.s() + d * (w[i] - m.s());
        out[i] = std::max(risky, safe);
        if (action) (*action)[i] = risky > safe ? 1 : 0;
    }
    return out;
}

FixedPointResult single_agent_value(const DpContext& ctx, const IterationOptions& opt) {
    auto res = iterate(
        ctx, opt, [&](std::span<const double> w, std::vector<int>* a) { return apply_single_agent(ctx, w, a); },
        "single-agent value iteration");
    const double s = ctx.model().s();
    for (std::size_t i = 0; i < ctx.grid().size(); ++i)
        if (res.value[i] > s + 1e-10) {
            res.cutoff = ctx.grid()[i];
            break;
        }
    return res;
}

FixedPointResult reward_fixed_point(const DpContext& ctx, double p_low, const IterationOptions& opt) {
    if (!(p_low > 0.0 && p_low < 1.0)) throw ValidationError("reward fixed point: p_low must lie in (0, 1)");
    auto res = iterate(
        ctx, opt,
        [&](std::span<const double> w, std::vector<int>* a) {
            a->assign(w.size(), 0);
            for (std::size_t i = 0; i < w.size(); ++i) (*a)[i] = ctx.grid()[i] > p_low ? 1 : 0;
            return apply_reward(ctx, p_low, w);
        },
        "reward value iteration");
    return res;
}

FixedPointResult punishment_fixed_point(const DpContext& ctx, double p_high, const IterationOptions& opt) {
    if (!(p_high > 0.0 && p_high < 1.0)) throw ValidationError("punishment fixed point: p_high must lie in (0, 1)");
    if (ctx.model().N() < 2) throw ValidationError("punishment fixed point requires N >= 2");
    return iterate(
        ctx, opt, [&](std::span<const double> w, std::vector<int>* a) { return apply_punishment(ctx, p_high, w, a); },
        "punishment value iteration");
}

SseStep sse_step(const DpContext& ctx, std::span<const double> wbar, std::span<const double> wlow) {
    const Model& m = ctx.model();
    const int N = m.N();
    if (N < 2) throw ValidationError("SSE iteration requires N >= 2");
    const double d = ctx.discount();
    const double s = m.s();
    const auto& grid = ctx.grid();
    const auto bar_N = ctx.expect(N, wbar);
    const auto low_1 = ctx.expect(1, wlow);
    const auto low_Nm1 = ctx.expect(N - 1, wlow);
    const auto low_N = ctx.expect(N, wlow);
    const std::size_t n = grid.size();
    SseStep st{std::vector<double>(n), std::vector<double>(n), std::vector<unsigned char>(n),
               std::vector<unsigned char>(n), std::vector<unsigned char>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double flow_risky = (1.0 - d) * m.m(grid[i]);
        // kappa = 0: everybody safe; a deviator experiments alone.
        const double lhs0 = s + d * (wbar[i] - s);
        const double rhs0 = std::max(s + d * (wlow[i] - s), flow_risky + d * low_1[i]);
        // kappa = 1: everybody risky; a deviator free-rides on N-1 experimenters.
        const double lhs1 = flow_risky + d * bar_N[i];
        const double rhs1 = std::max((1.0 - d) * s + d * low_Nm1[i], flow_risky + d * low_N[i]);
        const bool e0 = lhs0 >= rhs0 - kIcSlack;
        const bool e1 = lhs1 >= rhs1 - kIcSlack;
        st.enforceable0[i] = e0;
        st.enforceable1[i] = e1;
        if (e0 && e1) {
            st.wbar[i] = std::max(lhs0, lhs1);
            st.wlow[i] = std::min(rhs0, rhs1);
        } else if (e0) {
            st.wbar[i] = lhs0;
            st.wlow[i] = rhs0;
        } else if (e1) {
            st.wbar[i] = lhs1;
            st.wlow[i] = rhs1;
        } else {
            const double r = std::min(rhs0, rhs1);
            st.wbar[i] = r;
            st.wlow[i] = r;
            st.fallback[i] = 1;
        }
    }
    return st;
}

SseFrontier sse_value_iteration(const DpContext& ctx, const SseOptions& opt,
                                const std::optional<std::pair<BeliefGridFn, BeliefGridFn>>& init) {
    const auto& grid = ctx.grid();
    const std::size_t n = grid.size();
    std::vector<double> wbar(n);
    std::vector<double> wlow(n);
    if (init) {
        if (init->first.grid().size() != n || init->second.grid().size() != n)
            throw ValidationError("SSE iteration: initial pair is on a different grid");
        std::copy(init->first.values().begin(), init->first.values().end(), wbar.begin());
        std::copy(init->second.values().begin(), init->second.values().end(), wlow.begin());
    } else {
        const auto vn = planner_value(ctx.model());
        const auto v1 = single_agent_value(ctx.model());
        for (std::size_t i = 0; i < n; ++i) {
            wbar[i] = vn(grid[i]);
            wlow[i] = v1(grid[i]);
        }
    }

    SseFrontier fr{BeliefGridFn(grid, 0.0), BeliefGridFn(grid, 0.0), {}, {}, {}, 0, 0.0, false, {}, {}, {}, false};
    SseStep st;
    double best_at_window = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
        st = sse_step(ctx, wbar, wlow);
        const double diff = std::max(sup_diff(st.wbar, wbar), sup_diff(st.wlow, wlow));
        wbar.swap(st.wbar);
        wlow.swap(st.wlow);
        fr.iterations = it;
        fr.residual = diff;
        if (diff < opt.tolerance) {
            fr.converged = true;
            break;
        }
        if (opt.check_every > 0 && it % opt.check_every == 0) {
            fr.residual_history.push_back(diff);
            // Stalled: no halving of the residual over the last ten checks.
            const std::size_t h = fr.residual_history.size();
            if (h > 10) {
                best_at_window = fr.residual_history[h - 11];
                if (!(diff < 0.5 * best_at_window)) break;
            }
        }
    }
    // Enforceability and flags are reported for the final pair.
    SseStep last = sse_step(ctx, wbar, wlow);
    fr.enforceable0 = std::move(last.enforceable0);
    fr.enforceable1 = std::move(last.enforceable1);
    fr.fallback = std::move(last.fallback);
    fr.wbar = BeliefGridFn(grid, std::move(wbar));
    fr.wlow = BeliefGridFn(grid, std::move(wlow));
    const auto th = detect_thresholds(fr);
    fr.p_low_jump = th.p_low;
    fr.p_high_jump = th.p_high;
    fr.thresholds_from_enforceability = th.from_enforceability;
    return fr;
}

namespace {

std::optional<double> largest_jump(const BeliefGridFn& f, double floor) {
    const auto& g = f.grid();
    const std::size_t cells = g.size() - 1;
    std::vector<double> d(cells);
    for (std::size_t i = 0; i < cells; ++i) d[i] = std::abs(f[i + 1] - f[i]);
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < cells; ++i) {
        const double left = i > 0 ? d[i - 1] : 0.0;
        const double right = i + 1 < cells ? d[i + 1] : 0.0;
        if (d[i] > 10.0 * std::max(left, right) + floor && (!best || d[i] > d[*best])) best = i;
    }
    if (!best) return std::nullopt;
    return 0.5 * (g[*best] + g[*best + 1]);
}

}  // namespace

DetectedThresholds detect_thresholds(const SseFrontier& fr, double floor) {
    DetectedThresholds out;
    out.p_low = largest_jump(fr.wbar, floor);
    out.p_high = largest_jump(fr.wlow, floor);
    if (out.p_low && out.p_high) return out;
    out.from_enforceability = true;
    const auto& g = fr.wbar.grid();
    const std::size_t n = g.size();
    if (!out.p_low) {
        for (std::size_t i = 1; i < n; ++i)
            if (fr.enforceable1[i] && !fr.enforceable1[i - 1]) {
                out.p_low = 0.5 * (g[i - 1] + g[i]);
                break;
            }
    }
    if (!out.p_high) {
        for (std::size_t i = n - 1; i > 0; --i)
            if (fr.enforceable0[i - 1] && !fr.enforceable0[i]) {
                out.p_high = 0.5 * (g[i - 1] + g[i]);
                break;
            }
    }
    return out;
}

}  // namespace stratexp
