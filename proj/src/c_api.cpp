#include "stratexp/stratexp.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stratexp/closed_form.hpp"
#include "stratexp/dp.hpp"
#include "stratexp/game.hpp"
#include "stratexp/model.hpp"
#include "stratexp/params_io.hpp"
#include "stratexp/thresholds.hpp"

using namespace stratexp;

struct sx_params {
    Model model;
};

struct sx_frontier {
    SseFrontier frontier;
    DetectedThresholds thresholds;
    double delta;
};

struct sx_ic_report {
    IcReport report;
    Model model;
};

struct sx_sim {
    SimOutcome outcome;
};

namespace {

thread_local std::string g_last_error;

sx_status fail(sx_status code, std::string msg) {
    g_last_error = std::move(msg);
    return code;
}

template <class F>
sx_status guarded(F&& f) {
    try {
        return f();
    } catch (const ValidationError& e) {
        return fail(SX_ERR_VALIDATION, e.what());
    } catch (const ConvergenceError& e) {
        return fail(SX_ERR_NONCONVERGENCE, e.what());
    } catch (const DomainError& e) {
        return fail(SX_ERR_DOMAIN, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SX_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SX_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SX_ERR_INTERNAL, "unknown error");
    }
}

#define SX_REQUIRE(ptr)                                                   \
    do {                                                                  \
        if (!(ptr)) return fail(SX_ERR_NULL, #ptr " must not be NULL");   \
    } while (0)

ModelParams from_c(const sx_param_values& v) {
    ModelParams p;
    p.r = v.r;
    p.s = v.s;
    p.sigma = v.sigma;
    p.alpha0 = v.alpha0;
    p.alpha1 = v.alpha1;
    p.h = v.h;
    p.lambda0 = v.lambda0;
    p.lambda1 = v.lambda1;
    p.N = v.N;
    return p;
}

sx_status make_params(const ModelParams& p, sx_params** out) {
    *out = new sx_params{Model(p)};
    return SX_OK;
}

}  // namespace

extern "C" {

const char* sx_version(void) { return STRATEXP_VERSION; }

const char* sx_last_error(void) { return g_last_error.c_str(); }

const char* sx_status_name(sx_status status) {
    switch (status) {
        case SX_OK: return "ok";
        case SX_ERR_INTERNAL: return "internal error";
        case SX_ERR_VALIDATION: return "validation error";
        case SX_ERR_NONCONVERGENCE: return "non-convergence";
        case SX_ERR_DOMAIN: return "domain error";
        case SX_ERR_IO: return "i/o error";
        case SX_ERR_NULL: return "null argument";
        case SX_ERR_RANGE: return "index out of range";
    }
    return "unknown status";
}

sx_status sx_params_create(const sx_param_values* values, sx_params** out) {
    SX_REQUIRE(values);
    SX_REQUIRE(out);
    *out = nullptr;
    return guarded([&] { return make_params(from_c(*values), out); });
}

sx_status sx_params_parse(const char* text, sx_params** out) {
    SX_REQUIRE(text);
    SX_REQUIRE(out);
    *out = nullptr;
    return guarded([&] { return make_params(parse_params(text), out); });
}

sx_status sx_params_load(const char* path, sx_params** out) {
    SX_REQUIRE(path);
    SX_REQUIRE(out);
    *out = nullptr;
    return guarded([&]() -> sx_status {
        std::ifstream in(path, std::ios::binary);
        if (!in) return fail(SX_ERR_IO, std::string("cannot open parameter file '") + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return make_params(parse_params(ss.str()), out);
    });
}

void sx_params_destroy(sx_params* params) { delete params; }

sx_status sx_params_get(const sx_params* params, sx_param_values* out) {
    SX_REQUIRE(params);
    SX_REQUIRE(out);
    const ModelParams& p = params->model.params();
    *out = sx_param_values{p.r, p.s, p.sigma, p.alpha0, p.alpha1, p.h, p.lambda0, p.lambda1, p.N};
    return SX_OK;
}

sx_status sx_params_derived(const sx_params* params, sx_derived* out) {
    SX_REQUIRE(params);
    SX_REQUIRE(out);
    const DerivedQuantities& d = params->model.derived();
    *out = sx_derived{d.rho, d.m0, d.m1, d.p_myopic};
    return SX_OK;
}

sx_status sx_params_to_json(const sx_params* params, char* buf, size_t cap, size_t* needed) {
    SX_REQUIRE(params);
    if (cap > 0) SX_REQUIRE(buf);
    return guarded([&] {
        const std::string js = to_json(params->model.params());
        if (needed) *needed = js.size();
        if (cap > 0) {
            const std::size_t n = std::min(cap - 1, js.size());
            std::memcpy(buf, js.data(), n);
            buf[n] = '\0';
        }
        return SX_OK;
    });
}

const char* sx_regime_name(int regime) {
    if (regime < 0 || regime > 3) return "unknown";
    return regime_name(static_cast<Regime>(regime)).data();
}

sx_status sx_cutoffs_compute(const sx_params* params, sx_cutoffs* out) {
    SX_REQUIRE(params);
    SX_REQUIRE(out);
    return guarded([&] {
        const Model& m = params->model;
        const ThresholdResult t = solve_phat(m);
        const MuRoot muN = solve_mu(m, m.N());
        const MuRoot mu1 = solve_mu(m, 1.0);
        *out = sx_cutoffs{muN.mu,    mu1.mu, muN.residual, mu1.residual, t.pN_star, t.p1_star, m.p_myopic(),
                          t.phat, t.j_pN_star, t.f_residual, static_cast<int>(t.regime)};
        return SX_OK;
    });
}

sx_status sx_value_functions(const sx_params* params, const double* p, size_t n, double* v1star, double* vnstar,
                             double* vnphat) {
    SX_REQUIRE(params);
    if (n > 0) SX_REQUIRE(p);
    return guarded([&] {
        const Model& m = params->model;
        for (size_t i = 0; i < n; ++i)
            if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw ValidationError("beliefs must lie in [0, 1]");
        const ClosedFormValue v1 = single_agent_value(m);
        const ClosedFormValue vn = planner_value(m);
        std::optional<ClosedFormValue> vh;
        if (vnphat) vh.emplace(cutoff_policy_value(m, solve_phat(m).phat));
        for (size_t i = 0; i < n; ++i) {
            if (v1star) v1star[i] = v1(p[i]);
            if (vnstar) vnstar[i] = vn(p[i]);
            if (vnphat) vnphat[i] = (*vh)(p[i]);
        }
        return SX_OK;
    });
}

sx_status sx_threshold_gap(const sx_params* params, double p, double* out) {
    SX_REQUIRE(params);
    SX_REQUIRE(out);
    return guarded([&] {
        *out = threshold_gap(params->model, p);
        return SX_OK;
    });
}

sx_status sx_efficiency_point_compute(double beta, double r, int N, sx_efficiency_point* out) {
    SX_REQUIRE(out);
    return guarded([&] {
        const EfficiencyCurvePoint e = efficiency_point(beta, r, N);
        *out = sx_efficiency_point{e.beta, e.x_star ? 1 : 0, e.x_star.value_or(0.0), e.lambda1_star, e.lambda0_star,
                                   e.q_residual};
        return SX_OK;
    });
}

sx_status sx_value_iterate(const sx_params* params, double delta, size_t grid_size, sx_frontier** out) {
    SX_REQUIRE(params);
    SX_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        const Model& m = params->model;
        if (!(delta > 0.0)) throw ValidationError("period length must be positive");
        if (grid_size < 3) throw ValidationError("grid needs at least 3 nodes");
        DpContext ctx(m, delta, default_grid(m, grid_size));
        auto h = std::make_unique<sx_frontier>(sx_frontier{sse_value_iteration(ctx), {}, delta});
        h->thresholds = detect_thresholds(h->frontier);
        const bool ok = h->frontier.converged;
        *out = h.release();
        if (!ok)
            return fail(SX_ERR_NONCONVERGENCE, "coupled value iteration did not converge (residual " +
                                                   std::to_string((*out)->frontier.residual) + ")");
        return SX_OK;
    });
}

size_t sx_frontier_size(const sx_frontier* frontier) { return frontier ? frontier->frontier.wbar.grid().size() : 0; }

sx_status sx_frontier_nodes(const sx_frontier* frontier, double* p, double* wbar, double* wlow, int* enforceable0,
                            int* enforceable1, int* fallback) {
    SX_REQUIRE(frontier);
    const SseFrontier& f = frontier->frontier;
    const auto& g = f.wbar.grid();
    for (size_t i = 0; i < g.size(); ++i) {
        if (p) p[i] = g[i];
        if (wbar) wbar[i] = f.wbar.values()[i];
        if (wlow) wlow[i] = f.wlow.values()[i];
        if (enforceable0) enforceable0[i] = f.enforceable0[i];
        if (enforceable1) enforceable1[i] = f.enforceable1[i];
        if (fallback) fallback[i] = f.fallback[i];
    }
    return SX_OK;
}

sx_status sx_frontier_summary_get(const sx_frontier* frontier, sx_frontier_summary* out) {
    SX_REQUIRE(frontier);
    SX_REQUIRE(out);
    const SseFrontier& f = frontier->frontier;
    const DetectedThresholds& t = frontier->thresholds;
    *out = sx_frontier_summary{f.converged ? 1 : 0,
                               f.iterations,
                               f.residual,
                               t.p_low ? 1 : 0,
                               t.p_high ? 1 : 0,
                               t.p_low.value_or(0.0),
                               t.p_high.value_or(0.0),
                               t.from_enforceability ? 1 : 0,
                               static_cast<size_t>(std::count(f.fallback.begin(), f.fallback.end(), 1)),
                               frontier->delta};
    return SX_OK;
}

size_t sx_frontier_history_size(const sx_frontier* frontier) {
    return frontier ? frontier->frontier.residual_history.size() : 0;
}

sx_status sx_frontier_history(const sx_frontier* frontier, double* residuals) {
    SX_REQUIRE(frontier);
    SX_REQUIRE(residuals);
    std::copy(frontier->frontier.residual_history.begin(), frontier->frontier.residual_history.end(), residuals);
    return SX_OK;
}

void sx_frontier_destroy(sx_frontier* frontier) { delete frontier; }

sx_status sx_verify_ic(const sx_params* params, double p_low, double p_high, double delta, size_t grid_size,
                       sx_ic_report** out) {
    SX_REQUIRE(params);
    SX_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        const Model& m = params->model;
        if (!(delta > 0.0)) throw ValidationError("period length must be positive");
        if (grid_size < 3) throw ValidationError("grid needs at least 3 nodes");
        const AutomatonSpec spec{p_low, p_high};
        validate(spec);
        const double extra[] = {p_low, p_high};
        *out = new sx_ic_report{verify_sse(spec, delta, m, default_grid(m, grid_size, extra)), m};
        return SX_OK;
    });
}

size_t sx_ic_row_count(const sx_ic_report* report) { return report ? report->report.rows.size() : 0; }

sx_status sx_ic_row_get(const sx_ic_report* report, size_t i, sx_ic_row* out) {
    SX_REQUIRE(report);
    SX_REQUIRE(out);
    if (i >= report->report.rows.size()) return fail(SX_ERR_RANGE, "row index out of range");
    const IcRow& r = report->report.rows[i];
    *out = sx_ic_row{r.p, r.state == AutomatonState::good ? SX_STATE_GOOD : SX_STATE_BAD, r.kappa, r.lhs, r.rhs,
                     r.pass ? 1 : 0};
    return SX_OK;
}

size_t sx_ic_failure_count(const sx_ic_report* report) { return report ? report->report.failures.size() : 0; }

sx_status sx_ic_failure_get(const sx_ic_report* report, size_t i, sx_ic_interval* out) {
    SX_REQUIRE(report);
    SX_REQUIRE(out);
    if (i >= report->report.failures.size()) return fail(SX_ERR_RANGE, "failure index out of range");
    const IcInterval& f = report->report.failures[i];
    *out = sx_ic_interval{f.state == AutomatonState::good ? SX_STATE_GOOD : SX_STATE_BAD, f.from, f.to};
    return SX_OK;
}

sx_status sx_ic_eta(const sx_ic_report* report, double p, double* out) {
    SX_REQUIRE(report);
    SX_REQUIRE(out);
    return guarded([&] {
        *out = eta(p, report->report.values, report->model);
        return SX_OK;
    });
}

void sx_ic_report_destroy(sx_ic_report* report) { delete report; }

void sx_sim_config_default(sx_sim_config* config) {
    if (!config) return;
    const SimConfig d;
    *config = sx_sim_config{SX_STRATEGY_AUTOMATON, 0.0,     1.0,       d.cutoff, SX_STATE_GOOD, d.p0, d.delta,
                            d.horizon,             d.paths, d.seed,    1001};
}

sx_status sx_simulate(const sx_params* params, const sx_sim_config* config, const sx_deviation* deviations,
                      size_t n_deviations, sx_sim** out) {
    SX_REQUIRE(params);
    SX_REQUIRE(config);
    SX_REQUIRE(out);
    if (n_deviations > 0) SX_REQUIRE(deviations);
    *out = nullptr;
    return guarded([&] {
        const Model& m = params->model;
        SimConfig cfg;
        switch (config->strategy) {
            case SX_STRATEGY_AUTOMATON: cfg.strategy = StrategyKind::automaton; break;
            case SX_STRATEGY_CUTOFF: cfg.strategy = StrategyKind::markov_cutoff; break;
            case SX_STRATEGY_ALL_SAFE: cfg.strategy = StrategyKind::all_safe; break;
            case SX_STRATEGY_ALL_RISKY: cfg.strategy = StrategyKind::all_risky; break;
            default: throw ValidationError("unknown strategy code");
        }
        if (config->initial_state != SX_STATE_GOOD && config->initial_state != SX_STATE_BAD)
            throw ValidationError("unknown automaton state code");
        if (!(config->delta > 0.0)) throw ValidationError("period length must be positive");
        cfg.spec = AutomatonSpec{config->p_low, config->p_high};
        cfg.cutoff = config->cutoff;
        cfg.initial_state = config->initial_state == SX_STATE_GOOD ? AutomatonState::good : AutomatonState::bad;
        cfg.p0 = config->p0;
        cfg.delta = config->delta;
        cfg.horizon = config->horizon;
        cfg.paths = config->paths;
        cfg.seed = config->seed;
        for (size_t i = 0; i < n_deviations; ++i)
            cfg.deviations.push_back({deviations[i].player, deviations[i].period, deviations[i].action});
        std::optional<AutomatonValues> values;
        if (cfg.strategy == StrategyKind::automaton) {
            if (config->grid_size < 3) throw ValidationError("grid needs at least 3 nodes");
            const double extra[] = {cfg.spec.p_low, cfg.spec.p_high, cfg.p0};
            validate(cfg.spec);
            values.emplace(automaton_values(m, cfg.spec, cfg.delta, default_grid(m, config->grid_size, extra)));
        }
        *out = new sx_sim{simulate(m, cfg, values ? &*values : nullptr)};
        return SX_OK;
    });
}

sx_status sx_sim_summary_get(const sx_sim* sim, sx_sim_summary* out) {
    SX_REQUIRE(sim);
    SX_REQUIRE(out);
    const SimOutcome& o = sim->outcome;
    *out = sx_sim_summary{o.mean,       o.std_error,  o.focal_mean, o.focal_std_error, o.truncation_bound,
                          o.path_count, o.horizon,    o.seed};
    return SX_OK;
}

sx_status sx_sim_paths(const sx_sim* sim, double* payoff, double* focal_payoff, double* final_belief,
                       int* final_state) {
    SX_REQUIRE(sim);
    const auto& paths = sim->outcome.paths;
    for (size_t i = 0; i < paths.size(); ++i) {
        if (payoff) payoff[i] = paths[i].payoff;
        if (focal_payoff) focal_payoff[i] = paths[i].focal_payoff;
        if (final_belief) final_belief[i] = paths[i].final_belief;
        if (final_state) final_state[i] = paths[i].final_state == AutomatonState::good ? SX_STATE_GOOD : SX_STATE_BAD;
    }
    return SX_OK;
}

void sx_sim_destroy(sx_sim* sim) { delete sim; }

}  // extern "C"
