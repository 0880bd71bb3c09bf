// stratexp: command-line front end over the C interface.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stratexp/stratexp.h"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kInternal = 1, kValidation = 2, kNonConvergence = 3, kIcFailure = 4 };

// Error carrying the exit code it should map to.
struct CliError : std::runtime_error {
    int code;
    CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

int exit_for(sx_status st) {
    switch (st) {
        case SX_OK: return kOk;
        case SX_ERR_VALIDATION:
        case SX_ERR_DOMAIN:
        case SX_ERR_IO:
        case SX_ERR_RANGE: return kValidation;
        case SX_ERR_NONCONVERGENCE: return kNonConvergence;
        default: return kInternal;
    }
}

void check(sx_status st) {
    if (st != SX_OK) throw CliError(exit_for(st), sx_last_error());
}

struct ParamsDel {
    void operator()(sx_params* p) const { sx_params_destroy(p); }
};
struct FrontierDel {
    void operator()(sx_frontier* p) const { sx_frontier_destroy(p); }
};
struct IcDel {
    void operator()(sx_ic_report* p) const { sx_ic_report_destroy(p); }
};
struct SimDel {
    void operator()(sx_sim* p) const { sx_sim_destroy(p); }
};
using ParamsPtr = std::unique_ptr<sx_params, ParamsDel>;
using FrontierPtr = std::unique_ptr<sx_frontier, FrontierDel>;
using IcPtr = std::unique_ptr<sx_ic_report, IcDel>;
using SimPtr = std::unique_ptr<sx_sim, SimDel>;

std::string num(double x) {
    if (!std::isfinite(x)) throw CliError(kInternal, "refusing to write a non-finite number");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double finite(double x) {
    if (!std::isfinite(x)) throw CliError(kInternal, "refusing to write a non-finite number");
    return x;
}

std::string delta_tag(double d) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", d);
    return buf;
}

std::vector<double> parse_ladder(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (item.empty() || used != item.size() || !(v > 0.0) || !std::isfinite(v))
            throw CliError(kValidation, "--delta: '" + item + "' is not a positive number");
        out.push_back(v);
    }
    if (out.empty()) throw CliError(kValidation, "--delta: empty ladder");
    return out;
}

std::vector<int> parse_ints(const std::string& text, const char* flag) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        long v = 0;
        try {
            v = std::stol(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (item.empty() || used != item.size() || v < 1 || v > 100000)
            throw CliError(kValidation, std::string(flag) + ": '" + item + "' is not a positive integer");
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw CliError(kValidation, std::string(flag) + ": empty list");
    return out;
}

struct Globals {
    std::string params_path;
    std::string out_dir = ".";
    std::size_t grid = 1001;
    std::string delta;
    std::uint64_t seed = 0;
    bool strict = false;
};

class Run {
public:
    explicit Run(const Globals& g) : g_(g) {}

    const sx_params* params() {
        if (!params_) {
            if (g_.params_path.empty()) throw CliError(kValidation, "--params <file> is required");
            sx_params* p = nullptr;
            check(sx_params_load(g_.params_path.c_str(), &p));
            params_.reset(p);
        }
        return params_.get();
    }

    sx_param_values values() {
        sx_param_values v{};
        check(sx_params_get(params(), &v));
        return v;
    }

    json params_json() {
        std::size_t need = 0;
        check(sx_params_to_json(params(), nullptr, 0, &need));
        std::string buf(need + 1, '\0');
        check(sx_params_to_json(params(), buf.data(), buf.size(), &need));
        buf.resize(need);
        return json::parse(buf);
    }

    std::vector<double> deltas(bool required) {
        if (g_.delta.empty()) {
            if (required) throw CliError(kValidation, "--delta is required for this command");
            return {};
        }
        return parse_ladder(g_.delta);
    }

    fs::path out_path(const std::string& name) {
        std::error_code ec;
        fs::create_directories(g_.out_dir, ec);
        if (ec || !fs::is_directory(g_.out_dir))
            throw CliError(kValidation, "--out: cannot create directory '" + g_.out_dir + "'");
        return fs::path(g_.out_dir) / name;
    }

    json meta(std::optional<double> delta) {
        json m;
        m["tool"] = "stratexp";
        m["version"] = sx_version();
        m["params"] = params_json();
        m["grid"] = g_.grid;
        if (delta)
            m["delta"] = *delta;
        else
            m["delta"] = nullptr;
        m["seed"] = g_.seed;
        return m;
    }

    std::string csv_header(std::optional<double> delta, const std::vector<std::string>& notes = {}) {
        std::string h;
        h += std::string("# stratexp ") + sx_version() + "\n";
        h += "# params: " + params_json().dump() + "\n";
        h += "# grid: " + std::to_string(g_.grid) + "\n";
        h += "# delta: " + (delta ? num(*delta) : std::string("none")) + "\n";
        h += "# seed: " + std::to_string(g_.seed) + "\n";
        for (const auto& n : notes) h += "# " + n + "\n";
        return h;
    }

    void write(const std::string& name, const std::string& content) {
        const fs::path p = out_path(name);
        std::ofstream f(p, std::ios::binary | std::ios::trunc);
        if (!f) throw CliError(kValidation, "cannot write '" + p.string() + "'");
        f << content;
        if (!f) throw CliError(kInternal, "write failed for '" + p.string() + "'");
        std::cout << "wrote " << p.string() << "\n";
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    const Globals& g() const { return g_; }

private:
    Globals g_;
    ParamsPtr params_;
};

std::vector<double> uniform_points(std::size_t n) {
    if (n < 2) throw CliError(kValidation, "--grid must be at least 2");
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    p.back() = 1.0;
    return p;
}

// ---- cutoffs ----------------------------------------------------------------

json cutoffs_json(Run& run, const sx_cutoffs& c) {
    json j;
    j["meta"] = run.meta(std::nullopt);
    j["pN_star"] = finite(c.pN_star);
    j["p1_star"] = finite(c.p1_star);
    j["p_myopic"] = finite(c.p_myopic);
    j["phat"] = finite(c.phat);
    j["mu_N"] = finite(c.mu_N);
    j["mu_1"] = finite(c.mu_1);
    j["j_pN_star"] = finite(c.j_pN_star);
    j["regime"] = sx_regime_name(c.regime);
    j["f_residual"] = finite(c.f_residual);
    return j;
}

int cmd_cutoffs(Run& run) {
    sx_cutoffs c{};
    check(sx_cutoffs_compute(run.params(), &c));
    sx_derived d{};
    check(sx_params_derived(run.params(), &d));
    std::printf("%-10s %.10f\n", "rho", d.rho);
    std::printf("%-10s %.10f\n", "m0", d.m0);
    std::printf("%-10s %.10f\n", "m1", d.m1);
    std::printf("%-10s %.10f\n", "mu_N", c.mu_N);
    std::printf("%-10s %.10f\n", "mu_1", c.mu_1);
    std::printf("%-10s %.10f\n", "pN_star", c.pN_star);
    std::printf("%-10s %.10f\n", "phat", c.phat);
    std::printf("%-10s %.10f\n", "p1_star", c.p1_star);
    std::printf("%-10s %.10f\n", "p_myopic", c.p_myopic);
    std::printf("%-10s %.10f\n", "j_pN_star", c.j_pN_star);
    std::printf("%-10s %s\n", "regime", sx_regime_name(c.regime));
    json j = cutoffs_json(run, c);
    j["rho"] = d.rho;
    j["m0"] = d.m0;
    j["m1"] = d.m1;
    run.write_json("cutoffs.json", j);
    return kOk;
}

// ---- value functions ----------------------------------------------------------

std::string value_csv(Run& run, bool with_phat, bool fig1_order, const std::vector<std::string>& notes) {
    const std::vector<double> p = uniform_points(run.g().grid);
    std::vector<double> v1(p.size()), vn(p.size()), vh(p.size());
    check(sx_value_functions(run.params(), p.data(), p.size(), v1.data(), vn.data(), with_phat ? vh.data() : nullptr));
    std::string out = run.csv_header(std::nullopt, notes);
    if (fig1_order)
        out += "p,VNstar,V1star\n";
    else
        out += with_phat ? "p,V1star,VNstar,VNphat\n" : "p,V1star,VNstar\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        out += num(p[i]);
        if (fig1_order) {
            out += "," + num(vn[i]) + "," + num(v1[i]);
        } else {
            out += "," + num(v1[i]) + "," + num(vn[i]);
            if (with_phat) out += "," + num(vh[i]);
        }
        out += "\n";
    }
    return out;
}

int cmd_value_functions(Run& run) {
    const bool with_phat = run.values().N >= 2;
    run.write("value_functions.csv", value_csv(run, with_phat, false, {}));
    return kOk;
}

// ---- phat scan ------------------------------------------------------------------

int cmd_phat(Run& run, const std::string& players) {
    const std::vector<int> ns = parse_ints(players, "--players");
    sx_param_values base = run.values();
    std::string out = run.csv_header(std::nullopt);
    out += "N,phat,regime,pN_star,p1_star,j_pN_star,f_residual\n";
    for (int n : ns) {
        sx_param_values v = base;
        v.N = n;
        sx_params* raw = nullptr;
        check(sx_params_create(&v, &raw));
        ParamsPtr p(raw);
        sx_cutoffs c{};
        check(sx_cutoffs_compute(p.get(), &c));
        out += std::to_string(n) + "," + num(c.phat) + "," + sx_regime_name(c.regime) + "," + num(c.pN_star) + "," +
               num(c.p1_star) + "," + num(c.j_pN_star) + "," + num(c.f_residual) + "\n";
        std::printf("N=%-4d phat=%.10f  %s\n", n, c.phat, sx_regime_name(c.regime));
    }
    run.write("phat.csv", out);
    return kOk;
}

// ---- efficiency region ------------------------------------------------------------

std::string efficiency_csv(Run& run, std::size_t steps) {
    if (steps < 2) throw CliError(kValidation, "--beta-steps must be at least 2");
    const sx_param_values v = run.values();
    std::string out = run.csv_header(std::nullopt, {"beta = lambda0/lambda1; the efficient region lies between the "
                                                    "diagonal and the curve (lambda1_star, lambda0_star)"});
    out += "beta,has_point,x_star,lambda1_star,lambda0_star,q_residual\n";
    for (std::size_t i = 1; i < steps; ++i) {
        const double beta = static_cast<double>(i) / static_cast<double>(steps);
        sx_efficiency_point e{};
        check(sx_efficiency_point_compute(beta, v.r, v.N, &e));
        out += num(beta) + "," + std::to_string(e.has_point);
        if (e.has_point)
            out += "," + num(e.x_star) + "," + num(e.lambda1_star) + "," + num(e.lambda0_star) + "," +
                   num(e.q_residual) + "\n";
        else
            out += ",,,,\n";
    }
    return out;
}

// ---- value iteration --------------------------------------------------------------

struct RungResult {
    json summary;
    bool converged;
};

RungResult value_iterate_rung(Run& run, double delta, const std::string& prefix) {
    sx_frontier* raw = nullptr;
    const sx_status st = sx_value_iterate(run.params(), delta, run.g().grid, &raw);
    if (st != SX_OK && st != SX_ERR_NONCONVERGENCE) check(st);
    FrontierPtr f(raw);
    const std::size_t n = sx_frontier_size(f.get());
    std::vector<double> p(n), wb(n), wl(n);
    std::vector<int> e0(n), e1(n), fb(n);
    check(sx_frontier_nodes(f.get(), p.data(), wb.data(), wl.data(), e0.data(), e1.data(), fb.data()));
    sx_frontier_summary s{};
    check(sx_frontier_summary_get(f.get(), &s));

    std::string csv = run.csv_header(delta);
    csv += "p,wbar,wlow,enforceable_0,enforceable_1,fallback\n";
    for (std::size_t i = 0; i < n; ++i)
        csv += num(p[i]) + "," + num(wb[i]) + "," + num(wl[i]) + "," + std::to_string(e0[i]) + "," +
               std::to_string(e1[i]) + "," + std::to_string(fb[i]) + "\n";
    const std::string tag = prefix + "_d" + delta_tag(delta);
    run.write(tag + ".csv", csv);

    std::vector<double> hist(sx_frontier_history_size(f.get()));
    if (!hist.empty()) check(sx_frontier_history(f.get(), hist.data()));
    json j;
    j["meta"] = run.meta(delta);
    j["delta"] = delta;
    j["converged"] = s.converged != 0;
    j["iterations"] = s.iterations;
    j["residual"] = finite(s.residual);
    j["nodes"] = n;
    j["p_low_jump"] = s.has_p_low ? json(finite(s.p_low_jump)) : json(nullptr);
    j["p_high_jump"] = s.has_p_high ? json(finite(s.p_high_jump)) : json(nullptr);
    j["thresholds_from_enforceability"] = s.from_enforceability != 0;
    j["fallback_nodes"] = s.fallback_nodes;
    json h = json::array();
    for (double r : hist) h.push_back(finite(r));
    j["residual_history"] = h;
    run.write_json(tag + ".json", j);
    std::printf("delta=%-8s converged=%d iterations=%zu residual=%.3e p_low=%s p_high=%s\n", delta_tag(delta).c_str(),
                s.converged, s.iterations, s.residual, s.has_p_low ? num(s.p_low_jump).c_str() : "none",
                s.has_p_high ? num(s.p_high_jump).c_str() : "none");
    return {j, s.converged != 0};
}

int value_iterate_ladder(Run& run, const std::vector<double>& ladder, const std::string& prefix) {
    json all = json::array();
    bool ok = true;
    for (double d : ladder) {
        RungResult r = value_iterate_rung(run, d, prefix);
        ok = ok && r.converged;
        json row;
        for (const char* k : {"delta", "converged", "iterations", "residual", "p_low_jump", "p_high_jump",
                              "thresholds_from_enforceability", "fallback_nodes"})
            row[k] = r.summary[k];
        all.push_back(row);
    }
    json j;
    j["meta"] = run.meta(std::nullopt);
    j["ladder"] = ladder;
    j["rungs"] = all;
    j["all_converged"] = ok;
    run.write_json(prefix + "_summary.json", j);
    return ok ? kOk : kNonConvergence;
}

// ---- incentive checks ---------------------------------------------------------

int cmd_verify_ic(Run& run, double p_low, double p_high) {
    const std::vector<double> ladder = run.deltas(true);
    bool all_pass = true;
    for (double d : ladder) {
        sx_ic_report* raw = nullptr;
        check(sx_verify_ic(run.params(), p_low, p_high, d, run.g().grid, &raw));
        IcPtr rep(raw);
        std::string csv =
            run.csv_header(d, {"automaton p_low = " + num(p_low) + ", p_high = " + num(p_high)});
        csv += "p,state,kappa,lhs,rhs,pass\n";
        const std::size_t n = sx_ic_row_count(rep.get());
        for (std::size_t i = 0; i < n; ++i) {
            sx_ic_row r{};
            check(sx_ic_row_get(rep.get(), i, &r));
            csv += num(r.p) + "," + (r.state == SX_STATE_GOOD ? "good" : "bad") + "," + std::to_string(r.kappa) +
                   "," + num(r.lhs) + "," + num(r.rhs) + "," + std::to_string(r.pass) + "\n";
        }
        const std::string tag = "verify_ic_d" + delta_tag(d);
        run.write(tag + ".csv", csv);
        json fails = json::array();
        for (std::size_t i = 0; i < sx_ic_failure_count(rep.get()); ++i) {
            sx_ic_interval iv{};
            check(sx_ic_failure_get(rep.get(), i, &iv));
            fails.push_back({{"state", iv.state == SX_STATE_GOOD ? "good" : "bad"},
                             {"from", finite(iv.from)},
                             {"to", finite(iv.to)}});
        }
        json j;
        j["meta"] = run.meta(d);
        j["p_low"] = p_low;
        j["p_high"] = p_high;
        j["rows"] = n;
        j["passed"] = fails.empty();
        j["failures"] = fails;
        run.write_json(tag + ".json", j);
        std::printf("delta=%-8s nodes=%zu failing_intervals=%zu\n", delta_tag(d).c_str(), n / 2, fails.size());
        all_pass = all_pass && fails.empty();
    }
    if (!all_pass && run.g().strict) {
        std::fprintf(stderr, "incentive constraint fails at some nodes\n");
        return kIcFailure;
    }
    return kOk;
}

// ---- simulation ---------------------------------------------------------------

struct SimArgs {
    std::string strategy = "automaton";
    double p_low = -1.0, p_high = -1.0;
    double cutoff = -1.0;
    double p0 = 0.5;
    std::size_t paths = 10000;
    std::size_t horizon = 0;
    std::string state = "good";
    std::vector<std::string> deviations;
    bool per_path = false;
};

sx_deviation parse_deviation(const std::string& s) {
    int player = 0, action = 0;
    unsigned long long period = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%d:%llu:%d%c", &player, &period, &action, &tail) != 3)
        throw CliError(kValidation, "--deviation expects player:period:action, got '" + s + "'");
    return sx_deviation{player, static_cast<std::size_t>(period), action};
}

int cmd_simulate(Run& run, const SimArgs& a) {
    const std::vector<double> ladder = run.deltas(true);
    if (ladder.size() != 1) throw CliError(kValidation, "simulate takes a single --delta");
    sx_sim_config cfg;
    sx_sim_config_default(&cfg);
    if (a.strategy == "automaton") {
        cfg.strategy = SX_STRATEGY_AUTOMATON;
        if (a.p_low < 0.0 || a.p_high < 0.0)
            throw CliError(kValidation, "automaton strategy needs --p-low and --p-high");
    } else if (a.strategy == "cutoff") {
        cfg.strategy = SX_STRATEGY_CUTOFF;
        if (a.cutoff < 0.0) throw CliError(kValidation, "cutoff strategy needs --cutoff");
    } else if (a.strategy == "all-safe") {
        cfg.strategy = SX_STRATEGY_ALL_SAFE;
    } else if (a.strategy == "all-risky") {
        cfg.strategy = SX_STRATEGY_ALL_RISKY;
    } else {
        throw CliError(kValidation, "unknown --strategy '" + a.strategy + "'");
    }
    if (a.state != "good" && a.state != "bad") throw CliError(kValidation, "--state must be good or bad");
    cfg.p_low = a.p_low;
    cfg.p_high = a.p_high;
    cfg.cutoff = a.cutoff;
    cfg.initial_state = a.state == "good" ? SX_STATE_GOOD : SX_STATE_BAD;
    cfg.p0 = a.p0;
    cfg.delta = ladder.front();
    cfg.horizon = a.horizon;
    cfg.paths = a.paths;
    cfg.seed = run.g().seed;
    cfg.grid_size = run.g().grid;
    std::vector<sx_deviation> devs;
    for (const auto& s : a.deviations) devs.push_back(parse_deviation(s));

    sx_sim* raw = nullptr;
    check(sx_simulate(run.params(), &cfg, devs.data(), devs.size(), &raw));
    SimPtr sim(raw);
    sx_sim_summary s{};
    check(sx_sim_summary_get(sim.get(), &s));

    json j;
    j["meta"] = run.meta(cfg.delta);
    j["strategy"] = a.strategy;
    if (cfg.strategy == SX_STRATEGY_AUTOMATON) {
        j["p_low"] = a.p_low;
        j["p_high"] = a.p_high;
        j["initial_state"] = a.state;
    }
    if (cfg.strategy == SX_STRATEGY_CUTOFF) j["cutoff"] = a.cutoff;
    j["p0"] = a.p0;
    json dv = json::array();
    for (const auto& d : devs) dv.push_back({{"player", d.player}, {"period", d.period}, {"action", d.action}});
    j["deviations"] = dv;
    j["paths"] = s.paths;
    j["horizon"] = s.horizon;
    j["mean"] = finite(s.mean);
    j["std_error"] = finite(s.std_error);
    j["ci95"] = {finite(s.mean - 1.96 * s.std_error), finite(s.mean + 1.96 * s.std_error)};
    j["focal_mean"] = finite(s.focal_mean);
    j["focal_std_error"] = finite(s.focal_std_error);
    j["truncation_bound"] = finite(s.truncation_bound);
    run.write_json("simulate.json", j);
    std::printf("mean=%.10f se=%.3e paths=%zu horizon=%zu\n", s.mean, s.std_error, s.paths, s.horizon);

    if (a.per_path) {
        std::vector<double> pay(s.paths), fb(s.paths);
        check(sx_sim_paths(sim.get(), pay.data(), nullptr, fb.data(), nullptr));
        std::string csv = run.csv_header(cfg.delta, {"strategy " + a.strategy + ", p0 = " + num(a.p0)});
        csv += "path,payoff,final_belief\n";
        for (std::size_t i = 0; i < pay.size(); ++i)
            csv += std::to_string(i) + "," + num(pay[i]) + "," + num(fb[i]) + "\n";
        run.write("simulate_paths.csv", csv);
    }
    return kOk;
}

// ---- figures ------------------------------------------------------------------

int cmd_figures(Run& run, const std::string& which, std::size_t beta_steps) {
    if (which == "fig1") {
        run.write("fig1.csv",
                  value_csv(run, false, true,
                            {"symmetric Markov-perfect payoff omitted (not computed by this tool)"}));
        return kOk;
    }
    if (which == "fig2") {
        run.write("fig2.csv", value_csv(run, true, false, {}));
        return kOk;
    }
    if (which == "fig3") {
        run.write("fig3.csv", efficiency_csv(run, beta_steps));
        return kOk;
    }
    if (which == "fig4") return value_iterate_ladder(run, run.deltas(true), "fig4");
    throw CliError(kValidation, "unknown figure '" + which + "' (expected fig1, fig2, fig3 or fig4)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Strategic experimentation: cutoffs, value functions, equilibrium payoffs and simulation"};
    app.set_version_flag("--version", std::string(sx_version()));
    app.require_subcommand(1);

    Globals g;
    app.add_option("--params", g.params_path, "Parameter file (key = value lines or JSON)");
    app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
    app.add_option("--grid", g.grid, "Number of uniform belief nodes")->capture_default_str()->check(CLI::Range(3, 10000000));
    app.add_option("--delta", g.delta, "Period length, or a comma-separated ladder");
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_flag("--strict", g.strict, "Exit with status 4 when an incentive constraint fails");

    auto* c_cut = app.add_subcommand("cutoffs", "Cutoffs, threshold and regime");
    auto* c_vf = app.add_subcommand("value-functions", "Closed-form value functions on the grid");
    auto* c_phat = app.add_subcommand("phat", "Threshold as a function of the player count");
    std::string players = "2,3,5,8";
    c_phat->add_option("--players", players, "Comma-separated player counts")->capture_default_str();
    auto* c_eff = app.add_subcommand("efficiency-region", "Critical (lambda1, lambda0) curve over beta");
    std::size_t beta_steps = 100;
    c_eff->add_option("--beta-steps", beta_steps, "beta = i / steps for i = 1..steps-1")->capture_default_str();
    auto* c_vi = app.add_subcommand("value-iterate", "Best and worst equilibrium payoffs by value iteration");
    auto* c_ic = app.add_subcommand("verify-ic", "Incentive checks for a two-state automaton");
    double ic_low = 0.0, ic_high = 0.0;
    c_ic->add_option("--p-low", ic_low, "Reward-state cutoff")->required();
    c_ic->add_option("--p-high", ic_high, "Punishment-state cutoff")->required();
    auto* c_sim = app.add_subcommand("simulate", "Monte Carlo play of the discrete game");
    SimArgs sa;
    c_sim->add_option("--strategy", sa.strategy, "automaton, cutoff, all-safe or all-risky")->capture_default_str();
    c_sim->add_option("--p-low", sa.p_low, "Automaton reward-state cutoff");
    c_sim->add_option("--p-high", sa.p_high, "Automaton punishment-state cutoff");
    c_sim->add_option("--cutoff", sa.cutoff, "Cutoff of the Markov strategy");
    c_sim->add_option("--p0", sa.p0, "Prior belief")->capture_default_str();
    c_sim->add_option("--paths", sa.paths, "Number of paths")->capture_default_str();
    c_sim->add_option("--horizon", sa.horizon, "Periods per path (0: automatic)")->capture_default_str();
    c_sim->add_option("--state", sa.state, "Initial automaton state")->capture_default_str();
    c_sim->add_option("--deviation", sa.deviations, "player:period:action (repeatable)");
    c_sim->add_flag("--per-path", sa.per_path, "Also write per-path CSV");
    auto* c_fig = app.add_subcommand("figures", "Data behind the figures");
    std::string which;
    c_fig->add_option("which", which, "fig1, fig2, fig3 or fig4")->required();
    c_fig->add_option("--beta-steps", beta_steps, "fig3: beta = i / steps")->capture_default_str();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    }

    try {
        Run run(g);
        if (c_cut->parsed()) return cmd_cutoffs(run);
        if (c_vf->parsed()) return cmd_value_functions(run);
        if (c_phat->parsed()) return cmd_phat(run, players);
        if (c_eff->parsed()) {
            run.write("efficiency_region.csv", efficiency_csv(run, beta_steps));
            return kOk;
        }
        if (c_vi->parsed()) return value_iterate_ladder(run, run.deltas(true), "value_iterate");
        if (c_ic->parsed()) return cmd_verify_ic(run, ic_low, ic_high);
        if (c_sim->parsed()) return cmd_simulate(run, sa);
        if (c_fig->parsed()) return cmd_figures(run, which, beta_steps);
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kInternal;
    }
    return kInternal;
}
