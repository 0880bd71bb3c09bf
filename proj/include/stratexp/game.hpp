#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "stratexp/beliefs.hpp"
#include "stratexp/dp.hpp"
#include "stratexp/grid.hpp"

namespace stratexp {

/// Two-state automaton: in the good state everybody is risky iff p > p_low,
/// in the bad state iff p > p_high.
struct AutomatonSpec {
    double p_low;
    double p_high;

    int reward_action(double p) const noexcept { return p > p_low ? 1 : 0; }
    int punishment_action(double p) const noexcept { return p > p_high ? 1 : 0; }
};

enum class AutomatonState { good, bad };
std::string_view state_name(AutomatonState s);

void validate(const AutomatonSpec& spec);

/// Reward and punishment payoffs of an automaton at one period length.
struct AutomatonValues {
    AutomatonSpec spec;
    double delta;
    BeliefGridFn wbar;
    BeliefGridFn wlow;
};

AutomatonValues automaton_values(const Model& model, const AutomatonSpec& spec, double delta, const BeliefGrid& grid);

struct IcCheck {
    double lhs;
    double rhs;
    bool pass;  ///< lhs >= rhs - 1e-10
};

/// Incentive constraint for the common action kappa at belief p, with
/// conforming continuation wbar and deviation continuation wlow. Both sides
/// are evaluated directly from the transition kernels.
IcCheck check_ic(const Model& model, double delta, double p, int kappa, const BeliefGridFn& wbar,
                 const BeliefGridFn& wlow);

struct IcRow {
    double p;
    AutomatonState state;
    int kappa;
    double lhs;
    double rhs;
    bool pass;
};

struct IcInterval {
    AutomatonState state;
    double from;
    double to;
};

struct IcReport {
    AutomatonValues values;
    std::vector<IcRow> rows;
    std::vector<IcInterval> failures;  ///< maximal runs of failing nodes, per state

    bool passed() const noexcept { return failures.empty(); }
};

IcReport verify_sse(const AutomatonValues& values, const Model& model);
IcReport verify_sse(const AutomatonSpec& spec, double delta, const Model& model, const BeliefGrid& grid);

/// Probability of returning from the bad to the good state at belief p.
/// Zero when the punishment action is a best reply; otherwise the ratio that
/// makes the bad-state payoff equal wlow(p), clamped to [0, 1]. Throws
/// DomainError if the denominator is not positive on that branch.
double eta(double p, const AutomatonValues& values, const Model& model);

/// Same formula with expectations interpolated from node tables; used by the
/// simulator. Exact at grid nodes.
class EtaTable {
public:
    EtaTable(const AutomatonValues& values, const Model& model);
    double operator()(double p) const;

private:
    AutomatonSpec spec_;
    Model model_;
    double discount_;
    BeliefGridFn wbar_, wlow_;
    BeliefGridFn low_1_, low_Nm1_, low_N_, bar_N_;  ///< E_K of wlow / wbar at the nodes
};

enum class StrategyKind { automaton, markov_cutoff, all_safe, all_risky };
std::string_view strategy_name(StrategyKind k);

/// Player `player` takes `action` in period `period` instead of the prescribed one.
struct Deviation {
    int player;
    std::size_t period;
    int action;
};

struct SimConfig {
    StrategyKind strategy = StrategyKind::automaton;
    AutomatonSpec spec{0.0, 1.0};
    double cutoff = 0.5;  ///< markov_cutoff: risky iff p > cutoff
    AutomatonState initial_state = AutomatonState::good;
    double p0 = 0.5;
    double delta = 0.05;
    std::size_t horizon = 0;  ///< 0: smallest H with delta^H < 1e-9
    std::size_t paths = 1000;
    std::uint64_t seed = 0;
    std::vector<Deviation> deviations;
    bool record_detail = false;  ///< keep belief paths, jump times and observations
};

/// One experimenter's observation in one period: continuous increment of the
/// payoff process and the number of lump sums.
struct Observation {
    std::size_t period;
    int player;
    double dx_continuous;
    int jumps;
};

struct PathRecord {
    double payoff;        ///< average over players, per-period units
    double focal_payoff;  ///< player 0
    double final_belief;
    AutomatonState final_state;
    int theta;
    std::vector<double> beliefs;     ///< at period boundaries (detail only)
    std::vector<double> jump_times;  ///< absolute times of lump sums (detail only)
    std::vector<Observation> observations;
    std::vector<AutomatonState> states;  ///< state in each simulated period (detail only)
};

struct SimOutcome {
    std::vector<PathRecord> paths;
    double mean = 0.0;
    double std_error = 0.0;
    double focal_mean = 0.0;
    double focal_std_error = 0.0;
    std::size_t path_count = 0;
    std::uint64_t seed = 0;
    std::size_t horizon = 0;
    double truncation_bound = 0.0;  ///< m1 delta^horizon
};

/// Log-odds increment from one experimenter's observation.
double log_odds_increment(const Model& model, double delta, double dx_continuous, int jumps);

/// Smallest horizon with delta^H < 1e-9.
std::size_t default_horizon(const Model& model, double delta);

/// Monte Carlo play of the discrete game. `values` is required for the
/// automaton strategy (for eta in the bad state) and ignored otherwise.
SimOutcome simulate(const Model& model, const SimConfig& config, const AutomatonValues* values = nullptr);

/// 64-bit seed for (seed, path, stream) via SplitMix64 mixing.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t path, std::uint64_t stream);

}  // namespace stratexp
