#include "rmglab/learner_checks.hpp"

#include <algorithm>

#include "rmglab/bellman.hpp"
#include "rmglab/errors.hpp"
#include "rmglab/tolerances.hpp"

namespace rmglab {

namespace {

const run_archive& require_archive(const learner_output& out) {
    if (!out.archive)
        throw rmg_error(error_kind::invalid_config,
                        "invariant suite needs a learner run with archive enabled");
    return *out.archive;
}

} // namespace

bool meets_default_k_condition(int K, int H) { return K >= 1024 && H <= 3; }

std::vector<value_vector> empirical_mixture_value(const robust_markov_game& game,
                                                  const learner_output& out, int i) {
    const run_archive& archive = require_archive(out);
    const int H = game.H, S = game.S, A = game.actions[i], K = out.sched.K;
    const double sigma = game.radii[i];

    std::vector<value_vector> values(H + 1);
    values[H].assign(S, 0.0);
    for (int h = H - 1; h >= 0; --h) {
        values[h].assign(S, 0.0);
        for (int s = 0; s < S; ++s) {
            double acc = 0.0;
            for (int k = 0; k < K; ++k) {
                const empirical_model& emp = archive.models[i][h][k];
                const prob_row& pi = out.policies[h][k].rows[i][s];
                double per_k = 0.0;
                for (int a = 0; a < A; ++a)
                    per_k += pi[a] * (emp.r_hat[s][a] +
                                      tv_support_value(emp.row(s, a), values[h + 1], sigma));
                acc += out.sched.alpha_K[k] * per_k;
            }
            values[h][s] = acc;
        }
    }
    return values;
}

std::vector<value_vector> empirical_best_response_value(const robust_markov_game& game,
                                                        const learner_output& out, int i) {
    const run_archive& archive = require_archive(out);
    const int H = game.H, S = game.S, A = game.actions[i], K = out.sched.K;
    const double sigma = game.radii[i];

    std::vector<value_vector> values(H + 1);
    values[H].assign(S, 0.0);
    for (int h = H - 1; h >= 0; --h) {
        values[h].assign(S, 0.0);
        for (int s = 0; s < S; ++s) {
            double best = 0.0;
            for (int a = 0; a < A; ++a) {
                double acc = 0.0;
                for (int k = 0; k < K; ++k) {
                    const empirical_model& emp = archive.models[i][h][k];
                    acc += out.sched.alpha_K[k] *
                           (emp.r_hat[s][a] +
                            tv_support_value(emp.row(s, a), values[h + 1], sigma));
                }
                best = (a == 0) ? acc : std::max(best, acc);
            }
            values[h][s] = best;
        }
    }
    return values;
}

invariant_report check_learner_invariants(const robust_markov_game& game,
                                          const learner_output& out) {
    const run_archive& archive = require_archive(out);
    const int n = game.n, H = game.H, S = game.S, K = out.sched.K;

    invariant_report report;
    report.k_condition_met = meets_default_k_condition(K, H);

    double worst_opt = -1.0, worst_br = -1.0, worst_regret = -1.0;
    for (int i = 0; i < n; ++i) {
        const std::vector<value_vector> mixture_value = empirical_mixture_value(game, out, i);
        const std::vector<value_vector> br_value = empirical_best_response_value(game, out, i);
        for (int h = 0; h < H; ++h) {
            for (int s = 0; s < S; ++s) {
                worst_opt = std::max(worst_opt, mixture_value[h][s] - out.v_hat[i][h][s]);
                worst_br = std::max(worst_br, br_value[h][s] - out.v_hat[i][h][s]);

                // Realized FTRL regret against the archived q iterates.
                const int A = game.actions[i];
                double mix_term = 0.0;
                std::vector<double> per_action(A, 0.0);
                for (int k = 0; k < K; ++k) {
                    const std::vector<double>& q_row = archive.q[i][h][k][s];
                    const prob_row& pi = out.policies[h][k].rows[i][s];
                    mix_term += out.sched.alpha_K[k] * dot(pi, q_row);
                    for (int a = 0; a < A; ++a)
                        per_action[a] += out.sched.alpha_K[k] * q_row[a];
                }
                const double best = *std::max_element(per_action.begin(), per_action.end());
                worst_regret = std::max(worst_regret, (best - mix_term) - archive.beta[i][h][s]);
            }
        }
    }

    report.max_optimism_violation = worst_opt;
    report.max_br_violation = worst_br;
    report.max_regret_excess = worst_regret;
    report.optimism_ok = worst_opt <= tol::value;
    report.br_optimism_ok = worst_br <= tol::value;
    report.regret_le_bonus_ok = worst_regret <= tol::value;
    return report;
}

} // namespace rmglab
