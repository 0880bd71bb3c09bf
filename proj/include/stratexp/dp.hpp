#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "stratexp/grid.hpp"
#include "stratexp/model.hpp"

namespace stratexp {

/// Model, period length and belief grid shared by the discrete-time operators.
/// Expectation matrices are built on first use for each experimenter count.
/// Not safe for concurrent first use of the same K.
class DpContext {
public:
    DpContext(const Model& model, double delta, BeliefGrid grid);

    const Model& model() const noexcept { return model_; }
    double delta() const noexcept { return delta_; }
    double discount() const noexcept { return discount_; }
    const BeliefGrid& grid() const noexcept { return grid_; }

    const ExpectationMatrix& matrix(int K) const;
    /// E_K w at every node.
    std::vector<double> expect(int K, std::span<const double> w) const;

private:
    Model model_;
    double delta_;
    double discount_;
    BeliefGrid grid_;
    mutable std::vector<std::unique_ptr<ExpectationMatrix>> matrices_;
};

/// Uniform grid of n nodes plus exact nodes at p_N^*, p_1^*, p^m, p-hat (N >= 2),
/// eight nodes halving the last cell towards p = 1,
/// and any extra beliefs supplied.
BeliefGrid default_grid(const Model& model, std::size_t n, std::span<const double> extra = {});

struct IterationOptions {
    double tolerance = 1e-8;            ///< fixed-point error bound; stop when residual < (1 - delta) tolerance
    std::size_t max_iterations = 500000;
};

struct FixedPointResult {
    BeliefGridFn value;
    std::vector<int> action;       ///< 1 where the risky arm is chosen at the node
    std::size_t iterations = 0;
    double residual = 0.0;         ///< sup |T w - w| at the last step
    double max_ratio = 0.0;        ///< largest successive-difference ratio observed
    std::optional<double> cutoff;  ///< single-agent value only: inf {p : W(p) > s + 1e-10}
};

// One application of each operator; exposed for monotonicity checks.
std::vector<double> apply_single_agent(const DpContext& ctx, std::span<const double> w, std::vector<int>* action = nullptr);
std::vector<double> apply_reward(const DpContext& ctx, double p_low, std::span<const double> w);
std::vector<double> apply_punishment(const DpContext& ctx, double p_high, std::span<const double> w,
                                     std::vector<int>* action = nullptr);

/// Fixed point of T_1: single agent choosing each period.
FixedPointResult single_agent_value(const DpContext& ctx, const IterationOptions& opt = {});
/// Fixed point of the reward operator: all N players risky iff p > p_low.
FixedPointResult reward_fixed_point(const DpContext& ctx, double p_low, const IterationOptions& opt = {});
/// Best reply against N-1 opponents who are risky iff p > p_high.
FixedPointResult punishment_fixed_point(const DpContext& ctx, double p_high, const IterationOptions& opt = {});

/// Output of one evaluation of the coupled right-hand sides at (wbar, wlow).
struct SseStep {
    std::vector<double> wbar;
    std::vector<double> wlow;
    std::vector<unsigned char> enforceable0;
    std::vector<unsigned char> enforceable1;
    std::vector<unsigned char> fallback;  ///< node had an empty enforceable set
};

SseStep sse_step(const DpContext& ctx, std::span<const double> wbar, std::span<const double> wlow);

struct SseOptions {
    double tolerance = 1e-7;  ///< sup-norm change of the pair
    std::size_t max_iterations = 100000;
    std::size_t check_every = 500;
};

struct SseFrontier {
    BeliefGridFn wbar;
    BeliefGridFn wlow;
    std::vector<unsigned char> enforceable0;
    std::vector<unsigned char> enforceable1;
    std::vector<unsigned char> fallback;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::vector<double> residual_history;  ///< residual every check_every iterations
    std::optional<double> p_low_jump;
    std::optional<double> p_high_jump;
    bool thresholds_from_enforceability = false;
};

/// Jacobi iteration on the coupled equations, started from (V_N^*, V_1^*)
/// unless an initial pair is given. Does not throw on non-convergence; check
/// `converged`.
SseFrontier sse_value_iteration(const DpContext& ctx, const SseOptions& opt = {},
                                const std::optional<std::pair<BeliefGridFn, BeliefGridFn>>& init = std::nullopt);

struct DetectedThresholds {
    std::optional<double> p_low;
    std::optional<double> p_high;
    bool from_enforceability = false;
};

/// Cell midpoint of the largest increment exceeding 10x both neighbouring
/// increments plus `floor`, for wbar (p_low) and wlow (p_high). Falls back to
/// the enforceability transitions when no jump is found.
DetectedThresholds detect_thresholds(const SseFrontier& frontier, double floor = 1e-6);

}  // namespace stratexp
