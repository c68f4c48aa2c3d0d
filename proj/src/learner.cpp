#include "rmglab/learner.hpp"

#include <cmath>
#include <string>

#include "rmglab/bellman.hpp"
#include "rmglab/errors.hpp"

namespace rmglab {

namespace {

void validate_config(const robust_markov_game& game, const learner_config& config) {
    if (config.K < 1) throw rmg_error(error_kind::invalid_config, "learner needs K >= 1");
    if (config.N < 1) throw rmg_error(error_kind::invalid_config, "learner needs N >= 1");
    if (!(config.c_alpha >= 24.0))
        throw rmg_error(error_kind::invalid_config, "learner needs c_alpha >= 24");
    if (!(config.c_b > 0.0)) throw rmg_error(error_kind::invalid_config, "learner needs c_b > 0");
    if (!(config.delta > 0.0 && config.delta < 1.0))
        throw rmg_error(error_kind::invalid_config, "learner needs delta in (0,1)");

    const double projected = static_cast<double>(game.H) * config.K * config.N * game.S *
                             game.sum_actions();
    if (projected > config.sample_budget)
        throw rmg_error(error_kind::resource_limit,
                        "projected sample count " + std::to_string(projected) +
                            " exceeds budget " + std::to_string(config.sample_budget) +
                            " (H*K*N*S*sum_actions)");
}

} // namespace

q_table estimate_robust_q(const empirical_model& emp, const value_vector& v_next, double sigma,
                          exec policy) {
    if (emp.S != static_cast<int>(v_next.size()))
        throw rmg_error(error_kind::dimension_mismatch,
                        "empirical model and value vector disagree on S");
    std::vector<prob_row> rows;
    rows.reserve(static_cast<std::size_t>(emp.S) * emp.A);
    for (int s = 0; s < emp.S; ++s)
        for (int a = 0; a < emp.A; ++a) rows.push_back(emp.row(s, a));
    const std::vector<double> duals = batch_tv_support(rows, v_next, sigma, policy);

    q_table q(emp.S, std::vector<double>(emp.A, 0.0));
    for (int s = 0; s < emp.S; ++s)
        for (int a = 0; a < emp.A; ++a) q[s][a] = emp.r_hat[s][a] + duals[s * emp.A + a];
    return q;
}

q_table q_mix_update(const q_table& q_prev, const q_table& q_k, double alpha_k) {
    if (q_prev.size() != q_k.size())
        throw rmg_error(error_kind::dimension_mismatch, "q tables disagree on S");
    q_table out(q_prev.size());
    for (std::size_t s = 0; s < q_prev.size(); ++s) {
        if (q_prev[s].size() != q_k[s].size())
            throw rmg_error(error_kind::dimension_mismatch, "q tables disagree on A");
        out[s].resize(q_prev[s].size());
        for (std::size_t a = 0; a < q_prev[s].size(); ++a)
            out[s][a] = (1.0 - alpha_k) * q_prev[s][a] + alpha_k * q_k[s][a];
    }
    return out;
}

std::vector<prob_row> ftrl_policy_update(const q_table& q, double eta) {
    std::vector<prob_row> rows(q.size());
    for (std::size_t s = 0; s < q.size(); ++s) {
        const std::vector<double>& qs = q[s];
        double m = qs[0];
        for (double x : qs) m = std::max(m, x);
        prob_row& row = rows[s];
        row.resize(qs.size());
        double total = 0.0;
        for (std::size_t a = 0; a < qs.size(); ++a) {
            row[a] = std::exp(eta * (qs[a] - m));
            total += row[a];
        }
        for (double& p : row) p /= total;
    }
    return rows;
}

double bonus(const std::vector<std::vector<double>>& q_rows,
             const std::vector<prob_row>& pi_rows, const schedule& sch, double c_b, double delta,
             int S, int sum_actions) {
    const int K = sch.K;
    const double arg = static_cast<double>(K) * S * sum_actions / delta;
    const double log_cubed = std::pow(std::log(arg), 3.0);
    const double scale = c_b * std::sqrt(log_cubed / (static_cast<double>(K) * sch.H));

    double weighted = 0.0;
    for (int k = 0; k < K; ++k) {
        const double mean = dot(pi_rows[k], q_rows[k]);
        double second = 0.0;
        for (std::size_t a = 0; a < q_rows[k].size(); ++a)
            second += pi_rows[k][a] * q_rows[k][a] * q_rows[k][a];
        const double variance = second - mean * mean;
        weighted += sch.alpha_K[k] * (variance + sch.H);
    }
    return scale * weighted;
}

double finalize_value(const std::vector<std::vector<double>>& q_rows,
                      const std::vector<prob_row>& pi_rows, const schedule& sch, double beta_s,
                      int h, int H) {
    double inner = 0.0;
    for (int k = 0; k < sch.K; ++k) inner += sch.alpha_K[k] * dot(pi_rows[k], q_rows[k]);
    const double cap = static_cast<double>(H - h); // H - h + 1 in 1-based steps
    return std::min(inner + beta_s, cap);
}

learner_output robust_q_ftrl(const robust_markov_game& game, const learner_config& config) {
    validate_game(game);
    validate_config(game, config);

    const int n = game.n, H = game.H, S = game.S, K = config.K;
    learner_output out;
    out.sched = build_schedule(K, H, config.c_alpha);
    out.policies.assign(H, {});
    out.v_hat.assign(n, std::vector<value_vector>(H + 1));
    for (int i = 0; i < n; ++i) out.v_hat[i][H].assign(S, 0.0);
    if (config.archive) {
        run_archive archive;
        archive.q.assign(n, std::vector<std::vector<q_table>>(H));
        archive.models.assign(n, std::vector<std::vector<empirical_model>>(H));
        archive.beta.assign(n, std::vector<value_vector>(H));
        out.archive = std::move(archive);
    }

    const generative_model model(game, config.seed);

    for (int h = H - 1; h >= 0; --h) {
        // pi^1 is uniform for every agent and state.
        policy_step current;
        current.rows.assign(n, {});
        for (int i = 0; i < n; ++i)
            current.rows[i].assign(S, prob_row(game.actions[i], 1.0 / game.actions[i]));

        std::vector<q_table> Q(n);
        for (int i = 0; i < n; ++i) Q[i].assign(S, std::vector<double>(game.actions[i], 0.0));

        // Per-step histories retained for the bonus and value finalization.
        std::vector<std::vector<q_table>> q_hist(n);
        out.policies[h].reserve(K);

        for (int k = 1; k <= K; ++k) {
            // Freeze pi^k for every agent before anyone estimates or updates.
            out.policies[h].push_back(current);

            for (int i = 0; i < n; ++i) {
                empirical_model emp =
                    n_sample_estimation(model, current, i, h, k, config.N, config.policy);
                q_table q_k =
                    estimate_robust_q(emp, out.v_hat[i][h + 1], game.radii[i], config.policy);
                Q[i] = q_mix_update(Q[i], q_k, out.sched.alpha[k - 1]);
                q_hist[i].push_back(std::move(q_k));
                if (out.archive) out.archive->models[i][h].push_back(std::move(emp));
            }
            if (k < K) {
                const double eta = out.sched.eta_after(k);
                for (int i = 0; i < n; ++i) current.rows[i] = ftrl_policy_update(Q[i], eta);
            }
        }

        for (int i = 0; i < n; ++i) {
            value_vector beta_h(S, 0.0);
            value_vector v_h(S, 0.0);
            std::vector<std::vector<double>> q_rows(K);
            std::vector<prob_row> pi_rows(K);
            for (int s = 0; s < S; ++s) {
                for (int k = 0; k < K; ++k) {
                    q_rows[k] = q_hist[i][k][s];
                    pi_rows[k] = out.policies[h][k].rows[i][s];
                }
                beta_h[s] = bonus(q_rows, pi_rows, out.sched, config.c_b, config.delta, S,
                                  game.sum_actions());
                v_h[s] = finalize_value(q_rows, pi_rows, out.sched, beta_h[s], h, H);
            }
            out.v_hat[i][h] = std::move(v_h);
            if (out.archive) {
                out.archive->beta[i][h] = std::move(beta_h);
                out.archive->q[i][h] = std::move(q_hist[i]);
            }
        }
    }

    out.mixture.n = n;
    out.mixture.H = H;
    out.mixture.S = S;
    out.mixture.K = K;
    out.mixture.actions = game.actions;
    out.mixture.weights.assign(H, out.sched.alpha_K);
    out.mixture.steps = out.policies;
    out.samples_drawn = model.queries();
    return out;
}

} // namespace rmglab
