#include "stratexp/game.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace stratexp {

namespace {

constexpr double kIcTolerance = 1e-10;
constexpr double kTruncation = 1e-9;

// Payoff of one period followed by continuation E: safe flow is written as
// s + d (E - s) so that constant-s continuations reproduce s exactly.
double period_value(const Model& m, double d, double p, int risky, double continuation) {
    return risky ? (1.0 - d) * m.m(p) + d * continuation : m.s() + d * (continuation - m.s());
}

struct KernelSet {
    std::vector<TransitionKernel> kernels;

    KernelSet(const Model& model, double delta) {
        kernels.reserve(static_cast<std::size_t>(model.N()) + 1);
        for (int K = 0; K <= model.N(); ++K) kernels.emplace_back(model, K, delta);
    }
    double expect(int K, const BeliefGridFn& w, double p) const {
        return kernels[static_cast<std::size_t>(K)].expect(w, p);
    }
};

IcCheck check_ic_with(const Model& model, const KernelSet& ks, double d, double p, int kappa,
                      const BeliefGridFn& wbar, const BeliefGridFn& wlow) {
    const int N = model.N();
    const double lhs = period_value(model, d, p, kappa, ks.expect(N * kappa, wbar, p));
    const double rhs = period_value(model, d, p, 1 - kappa, ks.expect((N - 1) * kappa + 1 - kappa, wlow, p));
    return {lhs, rhs, lhs >= rhs - kIcTolerance};
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double eta_formula(const Model& m, double d, int kp, double p, double wlow_p, double wbar_cont, double wlow_cont,
                   double dev_cont) {
    // kp: punishment action; *_cont: E_{N kp} of wbar / wlow; dev_cont: E_{(N-1)kp + 1-kp} wlow.
    const double follow = period_value(m, d, p, kp, wlow_cont);
    const double deviate = period_value(m, d, p, 1 - kp, dev_cont);
    if (follow >= deviate - 1e-12) return 0.0;
    const double denom = d * (wbar_cont - wlow_cont);
    if (!(denom > 0.0))
        throw DomainError("eta: non-positive denominator at p = " + std::to_string(p) +
                          " (reward and punishment continuations are inconsistent)");
    const double eta = (wlow_p - follow) / denom;
    return std::clamp(eta, 0.0, 1.0);
}

}  // namespace

std::string_view state_name(AutomatonState s) { return s == AutomatonState::good ? "good" : "bad"; }

std::string_view strategy_name(StrategyKind k) {
    switch (k) {
        case StrategyKind::automaton: return "automaton";
        case StrategyKind::markov_cutoff: return "cutoff";
        case StrategyKind::all_safe: return "all-safe";
        case StrategyKind::all_risky: return "all-risky";
    }
    return "unknown";
}

void validate(const AutomatonSpec& spec) {
    if (!(spec.p_low > 0.0 && spec.p_low < spec.p_high && spec.p_high < 1.0))
        throw ValidationError("automaton thresholds must satisfy 0 < p_low < p_high < 1");
}

AutomatonValues automaton_values(const Model& model, const AutomatonSpec& spec, double delta, const BeliefGrid& grid) {
    validate(spec);
    DpContext ctx(model, delta, grid);
    auto wbar = reward_fixed_point(ctx, spec.p_low).value;
    auto wlow = punishment_fixed_point(ctx, spec.p_high).value;
    return AutomatonValues{spec, delta, std::move(wbar), std::move(wlow)};
}

IcCheck check_ic(const Model& model, double delta, double p, int kappa, const BeliefGridFn& wbar,
                 const BeliefGridFn& wlow) {
    if (kappa != 0 && kappa != 1) throw ValidationError("check_ic: kappa must be 0 or 1");
    const KernelSet ks(model, delta);
    return check_ic_with(model, ks, model.discount(delta), p, kappa, wbar, wlow);
}

IcReport verify_sse(const AutomatonValues& values, const Model& model) {
    const KernelSet ks(model, values.delta);
    const double d = model.discount(values.delta);
    const auto& grid = values.wbar.grid();
    IcReport rep{values, {}, {}};
    rep.rows.reserve(2 * grid.size());
    for (AutomatonState st : {AutomatonState::good, AutomatonState::bad}) {
        std::optional<IcInterval> run;
        double last_fail = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double p = grid[i];
            const int kappa =
                st == AutomatonState::good ? values.spec.reward_action(p) : values.spec.punishment_action(p);
            const IcCheck c = check_ic_with(model, ks, d, p, kappa, values.wbar, values.wlow);
            rep.rows.push_back({p, st, kappa, c.lhs, c.rhs, c.pass});
            if (!c.pass) {
                if (!run) run = IcInterval{st, p, p};
                last_fail = p;
            } else if (run) {
                run->to = last_fail;
                rep.failures.push_back(*run);
                run.reset();
            }
        }
        if (run) {
            run->to = last_fail;
            rep.failures.push_back(*run);
        }
    }
    return rep;
}

IcReport verify_sse(const AutomatonSpec& spec, double delta, const Model& model, const BeliefGrid& grid) {
    return verify_sse(automaton_values(model, spec, delta, grid), model);
}

double eta(double p, const AutomatonValues& values, const Model& model) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("eta requires p in [0, 1]");
    const int N = model.N();
    const double d = model.discount(values.delta);
    const int kp = values.spec.punishment_action(p);
    const TransitionKernel conform(model, N * kp, values.delta);
    const TransitionKernel deviate(model, (N - 1) * kp + 1 - kp, values.delta);
    return eta_formula(model, d, kp, p, values.wlow(p), conform.expect(values.wbar, p),
                       conform.expect(values.wlow, p), deviate.expect(values.wlow, p));
}

EtaTable::EtaTable(const AutomatonValues& values, const Model& model)
    : spec_(values.spec),
      model_(model),
      discount_(model.discount(values.delta)),
      wbar_(values.wbar),
      wlow_(values.wlow),
      low_1_(values.wlow),
      low_Nm1_(values.wlow),
      low_N_(values.wlow),
      bar_N_(values.wbar) {
    DpContext ctx(model, values.delta, values.wbar.grid());
    const int N = model.N();
    low_1_ = BeliefGridFn(values.wbar.grid(), ctx.expect(1, values.wlow.values()));
    low_Nm1_ = BeliefGridFn(values.wbar.grid(), ctx.expect(N - 1, values.wlow.values()));
    low_N_ = BeliefGridFn(values.wbar.grid(), ctx.expect(N, values.wlow.values()));
    bar_N_ = BeliefGridFn(values.wbar.grid(), ctx.expect(N, values.wbar.values()));
}

double EtaTable::operator()(double p) const {
    const int kp = spec_.punishment_action(p);
    if (kp == 1) return eta_formula(model_, discount_, 1, p, wlow_(p), bar_N_(p), low_N_(p), low_Nm1_(p));
    return eta_formula(model_, discount_, 0, p, wlow_(p), wbar_(p), wlow_(p), low_1_(p));
}

double log_odds_increment(const Model& model, double delta, double dx_continuous, int jumps) {
    const ModelParams& q = model.params();
    if (jumps > 0 && q.lambda0 == 0.0) return std::numeric_limits<double>::infinity();
    const double da = q.alpha1 - q.alpha0;
    double inc = -(q.lambda1 - q.lambda0) * delta;
    if (da != 0.0) {
        inc += da / (q.sigma * q.sigma) * (dx_continuous - q.alpha0 * delta);
        inc -= da * da / (2.0 * q.sigma * q.sigma) * delta;
    }
    if (jumps > 0 && q.lambda1 != q.lambda0) inc += jumps * std::log(q.lambda1 / q.lambda0);
    return inc;
}

std::size_t default_horizon(const Model& model, double delta) {
    const double d = model.discount(delta);
    auto h = static_cast<std::size_t>(std::ceil(std::log(kTruncation) / std::log(d)));
    while (std::pow(d, static_cast<double>(h)) >= kTruncation) ++h;
    return h;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t path, std::uint64_t stream) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(path + 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ splitmix64(stream + 0x8cb92ba72f3d8dd7ULL));
    return h;
}

SimOutcome simulate(const Model& model, const SimConfig& cfg, const AutomatonValues* values) {
    const ModelParams& q = model.params();
    const int N = model.N();
    if (!(cfg.p0 >= 0.0 && cfg.p0 <= 1.0)) throw ValidationError("simulate: p0 must lie in [0, 1]");
    if (cfg.paths == 0) throw ValidationError("simulate: at least one path is required");
    const double d = model.discount(cfg.delta);
    const std::size_t H = cfg.horizon == 0 ? default_horizon(model, cfg.delta) : cfg.horizon;
    if (!(std::pow(d, static_cast<double>(H)) < kTruncation))
        throw ValidationError("simulate: horizon too short, delta^H must be below 1e-9");
    std::optional<EtaTable> eta_table;
    if (cfg.strategy == StrategyKind::automaton) {
        if (!values) throw ValidationError("simulate: automaton strategy needs its reward/punishment payoffs");
        validate(cfg.spec);
        if (values->spec.p_low != cfg.spec.p_low || values->spec.p_high != cfg.spec.p_high ||
            values->delta != cfg.delta)
            throw ValidationError("simulate: automaton payoffs were computed for a different spec or period length");
        if (N >= 2) eta_table.emplace(*values, model);
    }
    if (cfg.strategy == StrategyKind::markov_cutoff && !(cfg.cutoff >= 0.0 && cfg.cutoff <= 1.0))
        throw ValidationError("simulate: cutoff must lie in [0, 1]");
    for (const auto& dev : cfg.deviations)
        if (dev.player < 0 || dev.player >= N || (dev.action != 0 && dev.action != 1))
            throw ValidationError("simulate: invalid deviation script entry");
    std::size_t last_deviation = 0;
    for (const auto& dev : cfg.deviations) last_deviation = std::max(last_deviation, dev.period + 1);

    const double r = q.r;
    // (A, B) = (int_0^Delta e^{-r t} dZ, Z_Delta), jointly Gaussian.
    const double var_b = cfg.delta;
    const double var_a = (1.0 - std::exp(-2.0 * r * cfg.delta)) / (2.0 * r);
    const double cov = (1.0 - d) / r;
    const double a_on_b = cov / var_b;
    const double a_resid = std::sqrt(std::max(0.0, var_a - cov * cov / var_b));
    const double sqrt_dt = std::sqrt(cfg.delta);

    auto prescribed = [&](AutomatonState st, double p) -> int {
        switch (cfg.strategy) {
            case StrategyKind::automaton:
                return st == AutomatonState::good ? cfg.spec.reward_action(p) : cfg.spec.punishment_action(p);
            case StrategyKind::markov_cutoff: return p > cfg.cutoff ? 1 : 0;
            case StrategyKind::all_safe: return 0;
            case StrategyKind::all_risky: return 1;
        }
        return 0;
    };
    // Nobody experiments now or in any state reachable without a deviation.
    auto frozen = [&](AutomatonState st, double p, std::size_t period) {
        if (period < last_deviation) return false;
        if (prescribed(st, p) != 0) return false;
        if (cfg.strategy == StrategyKind::automaton && st == AutomatonState::bad)
            return cfg.spec.reward_action(p) == 0;
        return true;
    };

    SimOutcome out;
    out.paths.resize(cfg.paths);
    out.path_count = cfg.paths;
    out.seed = cfg.seed;
    out.horizon = H;
    out.truncation_bound = model.m1() * std::pow(d, static_cast<double>(H));

    std::vector<double> payoff(static_cast<std::size_t>(N));
    std::vector<int> action(static_cast<std::size_t>(N));
    for (std::size_t path = 0; path < cfg.paths; ++path) {
        std::mt19937_64 noise(stream_seed(cfg.seed, path, 0));
        std::mt19937_64 device(stream_seed(cfg.seed, path, 1));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        PathRecord rec{};
        rec.theta = unif(noise) < cfg.p0 ? 1 : 0;
        const double alpha = rec.theta == 1 ? q.alpha1 : q.alpha0;
        const double lam = rec.theta == 1 ? q.lambda1 : q.lambda0;
        std::poisson_distribution<int> jumps_dist(lam * cfg.delta > 0.0 ? lam * cfg.delta : 1.0);

        double p = cfg.p0;
        double l = p == 0.0 ? -std::numeric_limits<double>::infinity()
                 : p == 1.0 ? std::numeric_limits<double>::infinity()
                            : log_odds(p);
        AutomatonState st = cfg.initial_state;
        std::fill(payoff.begin(), payoff.end(), 0.0);
        if (cfg.record_detail) rec.beliefs.push_back(p);
        double disc = 1.0;  // d^k
        for (std::size_t k = 0; k < H; ++k) {
            if (frozen(st, p, k)) {
                for (auto& v : payoff) v += disc * q.s;
                break;
            }
            if (cfg.record_detail) rec.states.push_back(st);
            double u_device = 1.0;
            if (cfg.strategy == StrategyKind::automaton && st == AutomatonState::bad) u_device = unif(device);
            const int base = prescribed(st, p);
            bool deviated = false;
            for (int i = 0; i < N; ++i) {
                action[static_cast<std::size_t>(i)] = base;
                for (const auto& dev : cfg.deviations)
                    if (dev.player == i && dev.period == k) action[static_cast<std::size_t>(i)] = dev.action;
                if (action[static_cast<std::size_t>(i)] != base) deviated = true;
            }
            double dl = 0.0;
            for (int i = 0; i < N; ++i) {
                auto& v = payoff[static_cast<std::size_t>(i)];
                if (action[static_cast<std::size_t>(i)] == 0) {
                    v += disc * (1.0 - d) * q.s;
                    continue;
                }
                const double z1 = gauss(noise);
                const double z2 = gauss(noise);
                const double b = sqrt_dt * z1;
                const double a = a_on_b * b + a_resid * z2;
                const int J = lam * cfg.delta > 0.0 ? jumps_dist(noise) : 0;
                double lumps = 0.0;
                for (int j = 0; j < J; ++j) {
                    const double tau = cfg.delta * unif(noise);
                    lumps += std::exp(-r * tau);
                    if (cfg.record_detail) rec.jump_times.push_back(static_cast<double>(k) * cfg.delta + tau);
                }
                v += disc * ((1.0 - d) * alpha + r * q.sigma * a + r * q.h * lumps);
                const double dxc = alpha * cfg.delta + q.sigma * b;
                if (cfg.record_detail) rec.observations.push_back({k, i, dxc, J});
                dl += log_odds_increment(model, cfg.delta, dxc, J);
            }
            const double p_start = p;
            l += dl;
            p = std::isinf(l) ? (l > 0 ? 1.0 : 0.0) : logistic(l);
            if (cfg.record_detail) rec.beliefs.push_back(p);
            if (cfg.strategy == StrategyKind::automaton) {
                if (st == AutomatonState::good) {
                    if (deviated) st = AutomatonState::bad;
                } else if (!deviated && eta_table && u_device < (*eta_table)(p_start)) {
                    st = AutomatonState::good;
                }
            }
            disc *= d;
        }
        double sum = 0.0;
        for (double v : payoff) sum += v;
        rec.payoff = sum / N;
        rec.focal_payoff = payoff[0];
        rec.final_belief = p;
        rec.final_state = st;
        out.paths[path] = std::move(rec);
    }

    // Welford: a constant sample yields exactly that constant and zero spread.
    auto stats = [&](auto get, double& mean, double& se) {
        double m = 0.0;
        double m2 = 0.0;
        std::size_t n = 0;
        for (const auto& pr : out.paths) {
            const double x = get(pr);
            ++n;
            const double dx = x - m;
            m += dx / static_cast<double>(n);
            m2 += dx * (x - m);
        }
        mean = m;
        se = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    };
    stats([](const PathRecord& pr) { return pr.payoff; }, out.mean, out.std_error);
    stats([](const PathRecord& pr) { return pr.focal_payoff; }, out.focal_mean, out.focal_std_error);
    return out;
}

}  // namespace stratexp
