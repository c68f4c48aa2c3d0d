#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rmglab/game.hpp"
#include "rmglab/parallel.hpp"
#include "rmglab/sampler.hpp"
#include "rmglab/schedule.hpp"

namespace rmglab {

using q_table = std::vector<std::vector<double>>; // [s][a]

struct learner_config {
    int K = 256;              // FTRL iterations per step
    int N = 32;               // samples per (s, a_i) cell per iteration
    double c_alpha = 24.0;    // schedule constant
    double c_b = 1.0;         // bonus constant
    double delta = 0.05;      // confidence level, in (0,1)
    std::uint64_t seed = 1;   // master seed for the generative model
    bool archive = false;     // retain per-(i,h,k) q-tables and empirical models
    double sample_budget = 1e9; // refuse runs whose projected H*K*N*S*sum(A_i) exceeds this
    exec policy = exec::parallel;
};

/// Opt-in full history for the invariant suite, indexed [i][h][k].
struct run_archive {
    std::vector<std::vector<std::vector<q_table>>> q;
    std::vector<std::vector<std::vector<empirical_model>>> models;
    std::vector<std::vector<value_vector>> beta; // [i][h] per-state bonuses
};

struct learner_output {
    schedule sched;
    std::vector<std::vector<policy_step>> policies; // [h][k], the iterates pi^k at step h
    policy_mixture mixture;                         // weights are alpha_k^K at every step
    std::vector<std::vector<value_vector>> v_hat;   // [i][h], h = 0..H (v_hat[i][H] = 0)
    std::uint64_t samples_drawn = 0;                // generative queries consumed
    std::optional<run_archive> archive;
};

/// One-step optimistic robust Q estimate from an empirical model:
/// q(s,a) = r_hat(s,a) + inner minimum of the empirical row against v_next under
/// radius sigma. sigma = 0 reduces to r_hat + p_hat . v_next exactly.
q_table estimate_robust_q(const empirical_model& emp, const value_vector& v_next, double sigma,
                          exec policy = exec::parallel);

/// Running Q average: (1 - alpha_k) * Q_prev + alpha_k * q_k entrywise.
q_table q_mix_update(const q_table& q_prev, const q_table& q_k, double alpha_k);

/// Exponential-weights policy from a Q table, one softmax row per state, computed
/// with per-row max subtraction so large eta*Q cannot overflow.
std::vector<prob_row> ftrl_policy_update(const q_table& q, double eta);

/// Optimistic bonus at one state: c_b * sqrt(log^3(K*S*sum_actions/delta) / (K*H))
/// * sum_k alpha_k^K * (Var_{pi^k}(q^k) + H), where q_rows[k] and pi_rows[k] are
/// iteration k's q and policy rows at that state.
double bonus(const std::vector<std::vector<double>>& q_rows,
             const std::vector<prob_row>& pi_rows, const schedule& sch, double c_b, double delta,
             int S, int sum_actions);

/// Final optimistic value at one state with 0-based step h:
/// min{ sum_k alpha_k^K <pi^k, q^k> + beta_s, H - h }.
double finalize_value(const std::vector<std::vector<double>>& q_rows,
                      const std::vector<prob_row>& pi_rows, const schedule& sch, double beta_s,
                      int h, int H);

/// The complete learner: backward over steps, K FTRL iterations per step with
/// fresh per-iteration empirical models, optimistic value finalization, and the
/// mixture output weighted by alpha_k^K. Bit-identical output for a fixed seed
/// under any execution policy.
learner_output robust_q_ftrl(const robust_markov_game& game, const learner_config& config);

} // namespace rmglab
