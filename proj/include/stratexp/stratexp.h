/* C interface to the strategic-experimentation library.
 *
 * Objects are opaque handles created by sx_*_create / compute functions and
 * released with the matching sx_*_destroy. Every fallible call returns an
 * sx_status; on failure sx_last_error() describes the problem (per thread,
 * valid until the next failing call on that thread). */
#ifndef STRATEXP_H
#define STRATEXP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(STRATEXP_BUILDING_LIBRARY)
#define SX_API __attribute__((visibility("default")))
#else
#define SX_API
#endif

typedef enum sx_status {
    SX_OK = 0,
    SX_ERR_INTERNAL = 1,
    SX_ERR_VALIDATION = 2,
    SX_ERR_NONCONVERGENCE = 3,
    SX_ERR_DOMAIN = 5,
    SX_ERR_IO = 6,
    SX_ERR_NULL = 7,
    SX_ERR_RANGE = 8
} sx_status;

SX_API const char* sx_version(void);
SX_API const char* sx_last_error(void);
SX_API const char* sx_status_name(sx_status status);

/* ---- parameters ---------------------------------------------------------- */

typedef struct sx_params sx_params;

typedef struct sx_param_values {
    double r, s, sigma, alpha0, alpha1, h, lambda0, lambda1;
    int N;
} sx_param_values;

typedef struct sx_derived {
    double rho, m0, m1, p_myopic;
} sx_derived;

SX_API sx_status sx_params_create(const sx_param_values* values, sx_params** out);
/* Key-value text or JSON, detected from the first non-blank character. */
SX_API sx_status sx_params_parse(const char* text, sx_params** out);
SX_API sx_status sx_params_load(const char* path, sx_params** out);
SX_API void sx_params_destroy(sx_params* params);
SX_API sx_status sx_params_get(const sx_params* params, sx_param_values* out);
SX_API sx_status sx_params_derived(const sx_params* params, sx_derived* out);
/* Copies a JSON echo into buf (NUL-terminated, truncated to cap); *needed
 * receives the full length excluding the terminator. buf may be NULL when cap is 0. */
SX_API sx_status sx_params_to_json(const sx_params* params, char* buf, size_t cap, size_t* needed);

/* ---- closed forms and thresholds ------------------------------------------ */

typedef enum sx_regime {
    SX_REGIME_BROWNIAN = 0,
    SX_REGIME_POISSON_INTERIOR = 1,
    SX_REGIME_POISSON_CORNER_PNSTAR = 2,
    SX_REGIME_POISSON_CORNER_P1STAR = 3
} sx_regime;

SX_API const char* sx_regime_name(int regime);

typedef struct sx_cutoffs {
    double mu_N, mu_1;
    double mu_N_residual, mu_1_residual;
    double pN_star, p1_star, p_myopic;
    double phat, j_pN_star;
    double f_residual;
    int regime;
} sx_cutoffs;

/* Requires N >= 2. */
SX_API sx_status sx_cutoffs_compute(const sx_params* params, sx_cutoffs* out);

/* V_1^*, V_N^* and V_{N,phat} at n beliefs in [0, 1]. Any output pointer may be NULL. */
SX_API sx_status sx_value_functions(const sx_params* params, const double* p, size_t n, double* v1star,
                                    double* vnstar, double* vnphat);

/* Pure Poisson learning only. */
SX_API sx_status sx_threshold_gap(const sx_params* params, double p, double* out);

typedef struct sx_efficiency_point {
    double beta;
    int has_point; /* 0 when beta <= 1/N */
    double x_star, lambda1_star, lambda0_star, q_residual;
} sx_efficiency_point;

SX_API sx_status sx_efficiency_point_compute(double beta, double r, int N, sx_efficiency_point* out);

/* ---- coupled value iteration ---------------------------------------------- */

typedef struct sx_frontier sx_frontier;

typedef struct sx_frontier_summary {
    int converged;
    size_t iterations;
    double residual;
    int has_p_low, has_p_high;
    double p_low_jump, p_high_jump;
    int from_enforceability;
    size_t fallback_nodes;
    double delta;
} sx_frontier_summary;

/* Uniform grid of grid_size nodes plus the cutoff nodes. Returns
 * SX_ERR_NONCONVERGENCE with *out still set when the iteration stalls or hits
 * its cap. */
SX_API sx_status sx_value_iterate(const sx_params* params, double delta, size_t grid_size, sx_frontier** out);
SX_API size_t sx_frontier_size(const sx_frontier* frontier);
/* Arrays of sx_frontier_size() entries; any pointer may be NULL. */
SX_API sx_status sx_frontier_nodes(const sx_frontier* frontier, double* p, double* wbar, double* wlow,
                                   int* enforceable0, int* enforceable1, int* fallback);
SX_API sx_status sx_frontier_summary_get(const sx_frontier* frontier, sx_frontier_summary* out);
SX_API size_t sx_frontier_history_size(const sx_frontier* frontier);
SX_API sx_status sx_frontier_history(const sx_frontier* frontier, double* residuals);
SX_API void sx_frontier_destroy(sx_frontier* frontier);

/* ---- automaton incentive checks ------------------------------------------- */

typedef enum sx_state { SX_STATE_GOOD = 0, SX_STATE_BAD = 1 } sx_state;

typedef struct sx_ic_report sx_ic_report;

typedef struct sx_ic_row {
    double p;
    int state;
    int kappa;
    double lhs, rhs;
    int pass;
} sx_ic_row;

typedef struct sx_ic_interval {
    int state;
    double from, to;
} sx_ic_interval;

SX_API sx_status sx_verify_ic(const sx_params* params, double p_low, double p_high, double delta, size_t grid_size,
                              sx_ic_report** out);
SX_API size_t sx_ic_row_count(const sx_ic_report* report);
SX_API sx_status sx_ic_row_get(const sx_ic_report* report, size_t i, sx_ic_row* out);
SX_API size_t sx_ic_failure_count(const sx_ic_report* report);
SX_API sx_status sx_ic_failure_get(const sx_ic_report* report, size_t i, sx_ic_interval* out);
/* Bad-to-good transition probability at belief p for the report's automaton. */
SX_API sx_status sx_ic_eta(const sx_ic_report* report, double p, double* out);
SX_API void sx_ic_report_destroy(sx_ic_report* report);

/* ---- simulation ----------------------------------------------------------- */

typedef enum sx_strategy {
    SX_STRATEGY_AUTOMATON = 0,
    SX_STRATEGY_CUTOFF = 1,
    SX_STRATEGY_ALL_SAFE = 2,
    SX_STRATEGY_ALL_RISKY = 3
} sx_strategy;

typedef struct sx_sim_config {
    int strategy;
    double p_low, p_high; /* automaton */
    double cutoff;        /* cutoff strategy */
    int initial_state;
    double p0;
    double delta;
    size_t horizon; /* 0: smallest H with delta^H < 1e-9 */
    size_t paths;
    uint64_t seed;
    size_t grid_size; /* grid for the automaton payoffs */
} sx_sim_config;

typedef struct sx_deviation {
    int player;
    size_t period;
    int action;
} sx_deviation;

typedef struct sx_sim sx_sim;

typedef struct sx_sim_summary {
    double mean, std_error;
    double focal_mean, focal_std_error;
    double truncation_bound;
    size_t paths, horizon;
    uint64_t seed;
} sx_sim_summary;

SX_API void sx_sim_config_default(sx_sim_config* config);
SX_API sx_status sx_simulate(const sx_params* params, const sx_sim_config* config, const sx_deviation* deviations,
                             size_t n_deviations, sx_sim** out);
SX_API sx_status sx_sim_summary_get(const sx_sim* sim, sx_sim_summary* out);
/* Arrays of summary.paths entries; any pointer may be NULL. */
SX_API sx_status sx_sim_paths(const sx_sim* sim, double* payoff, double* focal_payoff, double* final_belief,
                              int* final_state);
SX_API void sx_sim_destroy(sx_sim* sim);

#ifdef __cplusplus
}
#endif

#endif
