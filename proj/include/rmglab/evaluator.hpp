#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmglab/game.hpp"
#include "rmglab/parallel.hpp"

namespace rmglab {

/// Robust value of a product policy for agent i: backward recursion with the
/// expected-kernel inner minimum under radius sigma_i. Returns H+1 vectors,
/// index h for step h (0-based), index H the terminal zeros.
std::vector<value_vector> robust_policy_value(const robust_markov_game& game,
                                              const product_policy& policy, int i,
                                              exec policy_exec = exec::parallel);

struct best_response {
    std::vector<std::vector<int>> action; // [h][s], deterministic argmax (lowest index on ties)
    std::vector<value_vector> v;          // [h] for h = 0..H

    /// The argmax policy as one-hot rows for agent i (other slots left empty).
    product_policy as_policy(int i, int n, const std::vector<int>& actions) const;
};

/// Robust best response of agent i against the others' rows in `others`
/// (a product policy whose slot i is ignored and may be empty).
best_response robust_best_response(const robust_markov_game& game, const product_policy& others,
                                   int i, exec policy_exec = exec::parallel);

/// Mixture-value recursion: at each step the weighted slices share the next-step
/// value, with the inner minimum taken per slice against that shared value.
std::vector<value_vector> mixture_value_recursive(const robust_markov_game& game,
                                                  const policy_mixture& mixture, int i,
                                                  exec policy_exec = exec::parallel);

/// Best-response analog: max over agent i's action of the weighted per-slice
/// backups, sharing the next-step value across slices.
std::vector<value_vector> mixture_best_response_recursive(const robust_markov_game& game,
                                                          const policy_mixture& mixture, int i,
                                                          exec policy_exec = exec::parallel);

/// Monte-Carlo (or exact) evaluation of the literal mixture semantics: policy
/// sequences drawn one slice per step, each sequence evaluated as a full product
/// policy, estimates at step 0 per state. When K^H <= 4096 (and force_sampling is
/// off) the exact enumeration is computed instead and se is zero.
struct mc_estimate {
    value_vector mean; // per state, step 0
    value_vector se;   // per state; zero when exact
    int draws = 0;     // sequences evaluated (enumeration count when exact)
    bool exact = false;
};

mc_estimate mixture_value_mc(const robust_markov_game& game, const policy_mixture& mixture,
                             int i, int M, std::uint64_t seed,
                             exec policy_exec = exec::parallel, bool force_sampling = false);

mc_estimate mixture_best_response_mc(const robust_markov_game& game,
                                     const policy_mixture& mixture, int i, int M,
                                     std::uint64_t seed, exec policy_exec = exec::parallel,
                                     bool force_sampling = false);

enum class gap_method { recursive, monte_carlo };

struct gap_entry {
    int agent = 0;
    int state = 0;
    double br_value = 0.0;
    double mix_value = 0.0;
    double diff = 0.0;
    double se = 0.0; // combined standard error of diff (Monte-Carlo only)
};

/// Equilibrium-gap report at step 0: per-(agent, state) best-response vs mixture
/// values, per-agent maxima, and the overall gap (max over all entries).
struct gap_report {
    gap_method method = gap_method::recursive;
    bool exact = true;          // recursive, or Monte-Carlo resolved by enumeration
    int mc_draws = 0;           // M per estimate when sampling
    double ci_half_width = 0.0; // 1.96 * se of the overall-gap entry (0 when exact)
    std::vector<gap_entry> entries;
    std::vector<double> per_agent_gap;
    double overall_gap = 0.0;
    double overall_se = 0.0;
};

/// Computes the gap with the selected method. M and seed apply to monte_carlo.
gap_report cce_gap(const robust_markov_game& game, const policy_mixture& mixture,
                   gap_method method, int M = 0, std::uint64_t seed = 0,
                   exec policy_exec = exec::parallel);

std::string gap_report_json(const gap_report& report, const std::string& run_id);
std::string gap_report_csv_header();
std::string gap_report_csv_row(const gap_report& report, const std::string& run_id);

/// Verifies the span bound max_s - min_s <= min{1/sigma_i, H-h} + tolerance for
/// the mixture recursions of every agent at every step. Reports the largest
/// excess over the bound through max_excess when provided.
bool evaluator_spans_ok(const robust_markov_game& game, const policy_mixture& mixture,
                        double* max_excess = nullptr, exec policy_exec = exec::parallel);

} // namespace rmglab
