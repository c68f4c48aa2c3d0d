#include "rmglab/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "rmglab/bellman.hpp"
#include "rmglab/csv.hpp"
#include "rmglab/errors.hpp"
#include "rmglab/rng.hpp"
#include "rmglab/sampler.hpp"
#include "rmglab/tolerances.hpp"

namespace rmglab {

namespace {

policy_step step_of(const product_policy& policy, int h, int n) {
    policy_step step;
    step.rows.resize(n);
    for (int j = 0; j < n; ++j)
        if (!policy.rows[j].empty()) step.rows[j] = policy.rows[j][h];
    return step;
}

} // namespace

std::vector<value_vector> robust_policy_value(const robust_markov_game& game,
                                              const product_policy& policy, int i,
                                              exec policy_exec) {
    std::vector<value_vector> values(game.H + 1);
    values[game.H].assign(game.S, 0.0);
    for (int h = game.H - 1; h >= 0; --h) {
        const policy_step step = step_of(policy, h, game.n);
        const auto table = robust_backup(game, i, h, values[h + 1], step, policy_exec);
        values[h].assign(game.S, 0.0);
        for (int s = 0; s < game.S; ++s) values[h][s] = dot(policy.rows[i][h][s], table[s]);
    }
    return values;
}

product_policy best_response::as_policy(int i, int n, const std::vector<int>& actions) const {
    product_policy out;
    out.rows.resize(n);
    const int H = static_cast<int>(action.size());
    out.rows[i].assign(H, {});
    for (int h = 0; h < H; ++h) {
        const int S = static_cast<int>(action[h].size());
        out.rows[i][h].assign(S, prob_row(actions[i], 0.0));
        for (int s = 0; s < S; ++s) out.rows[i][h][s][action[h][s]] = 1.0;
    }
    return out;
}

best_response robust_best_response(const robust_markov_game& game, const product_policy& others,
                                   int i, exec policy_exec) {
    best_response result;
    result.v.assign(game.H + 1, {});
    result.v[game.H].assign(game.S, 0.0);
    result.action.assign(game.H, std::vector<int>(game.S, 0));
    for (int h = game.H - 1; h >= 0; --h) {
        const policy_step step = step_of(others, h, game.n);
        const auto table = robust_backup(game, i, h, result.v[h + 1], step, policy_exec);
        result.v[h].assign(game.S, 0.0);
        for (int s = 0; s < game.S; ++s) {
            int best_a = 0;
            double best = table[s][0];
            for (int a = 1; a < game.actions[i]; ++a)
                if (table[s][a] > best) { // strict: lowest index wins ties
                    best = table[s][a];
                    best_a = a;
                }
            result.v[h][s] = best;
            result.action[h][s] = best_a;
        }
    }
    return result;
}

std::vector<value_vector> mixture_value_recursive(const robust_markov_game& game,
                                                  const policy_mixture& mixture, int i,
                                                  exec policy_exec) {
    validate_mixture(game, mixture);
    std::vector<value_vector> values(game.H + 1);
    values[game.H].assign(game.S, 0.0);
    for (int h = game.H - 1; h >= 0; --h) {
        values[h].assign(game.S, 0.0);
        for (int k = 0; k < mixture.K; ++k) {
            const auto table =
                robust_backup(game, i, h, values[h + 1], mixture.steps[h][k], policy_exec);
            const double w = mixture.weights[h][k];
            for (int s = 0; s < game.S; ++s)
                values[h][s] += w * dot(mixture.steps[h][k].rows[i][s], table[s]);
        }
    }
    return values;
}

std::vector<value_vector> mixture_best_response_recursive(const robust_markov_game& game,
                                                          const policy_mixture& mixture, int i,
                                                          exec policy_exec) {
    validate_mixture(game, mixture);
    std::vector<value_vector> values(game.H + 1);
    values[game.H].assign(game.S, 0.0);
    for (int h = game.H - 1; h >= 0; --h) {
        values[h].assign(game.S, 0.0);
        std::vector<std::vector<double>> weighted(game.S,
                                                  std::vector<double>(game.actions[i], 0.0));
        for (int k = 0; k < mixture.K; ++k) {
            const auto table =
                robust_backup(game, i, h, values[h + 1], mixture.steps[h][k], policy_exec);
            const double w = mixture.weights[h][k];
            for (int s = 0; s < game.S; ++s)
                for (int a = 0; a < game.actions[i]; ++a) weighted[s][a] += w * table[s][a];
        }
        for (int s = 0; s < game.S; ++s)
            values[h][s] = *std::max_element(weighted[s].begin(), weighted[s].end());
    }
    return values;
}

namespace {

// Shared machinery for the literal mixture semantics: evaluate per policy
// sequence, exactly when the sequence space is small, by sampling otherwise.
template <typename PerSequence>
mc_estimate mixture_expectation(const robust_markov_game& game, const policy_mixture& mixture,
                                int M, std::uint64_t seed, bool force_sampling,
                                std::uint64_t purpose, int agent, PerSequence&& evaluate) {
    validate_mixture(game, mixture);
    const int H = game.H, S = game.S, K = mixture.K;

    mc_estimate est;
    est.mean.assign(S, 0.0);
    est.se.assign(S, 0.0);

    const double space = std::pow(static_cast<double>(K), static_cast<double>(H));
    if (!force_sampling && space <= 4096.0) {
        // Exact enumeration over all K^H slice assignments.
        std::vector<int> ks(H, 0);
        int sequences = 0;
        while (true) {
            double w = 1.0;
            for (int h = 0; h < H; ++h) w *= mixture.weights[h][ks[h]];
            ++sequences;
            if (w != 0.0) {
                const value_vector v0 = evaluate(ks);
                for (int s = 0; s < S; ++s) est.mean[s] += w * v0[s];
            }
            int pos = H - 1;
            while (pos >= 0 && ++ks[pos] == K) ks[pos--] = 0;
            if (pos < 0) break;
        }
        est.draws = sequences;
        est.exact = true;
        return est;
    }

    if (M < 1) throw rmg_error(error_kind::invalid_config, "Monte-Carlo evaluation needs M >= 1");
    std::vector<value_vector> draws(M);
    for (int m = 0; m < M; ++m) {
        rng_stream stream{seed, stream_tag::mc_sequence, purpose,
                          static_cast<std::uint64_t>(agent), static_cast<std::uint64_t>(m)};
        std::vector<int> ks(H);
        for (int h = 0; h < H; ++h) ks[h] = sample_categorical(mixture.weights[h], stream);
        draws[m] = evaluate(ks);
    }
    for (int s = 0; s < S; ++s) {
        double mean = 0.0;
        for (int m = 0; m < M; ++m) mean += draws[m][s];
        mean /= M;
        double var = 0.0;
        for (int m = 0; m < M; ++m) var += (draws[m][s] - mean) * (draws[m][s] - mean);
        est.mean[s] = mean;
        est.se[s] = (M > 1) ? std::sqrt(var / (M - 1) / M) : 0.0;
    }
    est.draws = M;
    est.exact = false;
    return est;
}

} // namespace

mc_estimate mixture_value_mc(const robust_markov_game& game, const policy_mixture& mixture,
                             int i, int M, std::uint64_t seed, exec policy_exec,
                             bool force_sampling) {
    return mixture_expectation(game, mixture, M, seed, force_sampling, 0, i,
                               [&](const std::vector<int>& ks) {
                                   const product_policy policy = mixture.assemble(ks);
                                   return robust_policy_value(game, policy, i, policy_exec)[0];
                               });
}

mc_estimate mixture_best_response_mc(const robust_markov_game& game,
                                     const policy_mixture& mixture, int i, int M,
                                     std::uint64_t seed, exec policy_exec, bool force_sampling) {
    return mixture_expectation(game, mixture, M, seed, force_sampling, 1, i,
                               [&](const std::vector<int>& ks) {
                                   const product_policy policy = mixture.assemble(ks);
                                   return robust_best_response(game, policy, i, policy_exec)
                                       .v[0];
                               });
}

gap_report cce_gap(const robust_markov_game& game, const policy_mixture& mixture,
                   gap_method method, int M, std::uint64_t seed, exec policy_exec) {
    gap_report report;
    report.method = method;

    for (int i = 0; i < game.n; ++i) {
        value_vector br, mix, se;
        se.assign(game.S, 0.0);
        if (method == gap_method::recursive) {
            br = mixture_best_response_recursive(game, mixture, i, policy_exec)[0];
            mix = mixture_value_recursive(game, mixture, i, policy_exec)[0];
        } else {
            const mc_estimate br_est =
                mixture_best_response_mc(game, mixture, i, M, seed, policy_exec);
            const mc_estimate mix_est = mixture_value_mc(game, mixture, i, M, seed, policy_exec);
            br = br_est.mean;
            mix = mix_est.mean;
            for (int s = 0; s < game.S; ++s)
                se[s] = std::sqrt(br_est.se[s] * br_est.se[s] + mix_est.se[s] * mix_est.se[s]);
            report.exact = br_est.exact && mix_est.exact;
            report.mc_draws = br_est.exact ? 0 : M;
        }

        double agent_gap = 0.0;
        bool first = true;
        for (int s = 0; s < game.S; ++s) {
            gap_entry entry;
            entry.agent = i;
            entry.state = s;
            entry.br_value = br[s];
            entry.mix_value = mix[s];
            entry.diff = br[s] - mix[s];
            entry.se = se[s];
            report.entries.push_back(entry);
            if (first || entry.diff > agent_gap) agent_gap = entry.diff;
            first = false;
        }
        report.per_agent_gap.push_back(agent_gap);
    }

    bool first = true;
    for (const gap_entry& entry : report.entries) {
        if (first || entry.diff > report.overall_gap) {
            report.overall_gap = entry.diff;
            report.overall_se = entry.se;
        }
        first = false;
    }
    if (method == gap_method::monte_carlo && !report.exact)
        report.ci_half_width = 1.96 * report.overall_se;
    return report;
}

std::string gap_report_json(const gap_report& report, const std::string& run_id) {
    nlohmann::json doc;
    doc["run_id"] = run_id;
    doc["method"] = report.method == gap_method::recursive ? "recursive" : "mc";
    doc["exact"] = report.exact;
    doc["mc_draws"] = report.mc_draws;
    doc["ci_half_width"] = report.ci_half_width;
    doc["overall_gap"] = report.overall_gap;
    doc["overall_se"] = report.overall_se;
    doc["per_agent_gap"] = report.per_agent_gap;
    nlohmann::json entries = nlohmann::json::array();
    for (const gap_entry& e : report.entries)
        entries.push_back({{"agent", e.agent},
                           {"state", e.state},
                           {"br_value", e.br_value},
                           {"mix_value", e.mix_value},
                           {"diff", e.diff},
                           {"se", e.se}});
    doc["entries"] = entries;
    return doc.dump(1) + "\n";
}

std::string gap_report_csv_header() {
    return csv_row({"run_id", "method", "per_agent_gap", "overall_gap", "se"});
}

std::string gap_report_csv_row(const gap_report& report, const std::string& run_id) {
    std::string per_agent;
    for (std::size_t i = 0; i < report.per_agent_gap.size(); ++i) {
        if (i) per_agent += ';';
        per_agent += csv_double(report.per_agent_gap[i]);
    }
    return csv_row({run_id, report.method == gap_method::recursive ? "recursive" : "mc",
                    per_agent, csv_double(report.overall_gap), csv_double(report.overall_se)});
}

bool evaluator_spans_ok(const robust_markov_game& game, const policy_mixture& mixture,
                        double* max_excess, exec policy_exec) {
    double worst = -1.0;
    for (int i = 0; i < game.n; ++i) {
        const auto mix = mixture_value_recursive(game, mixture, i, policy_exec);
        const auto br = mixture_best_response_recursive(game, mixture, i, policy_exec);
        for (int h = 0; h < game.H; ++h) {
            const double bound =
                std::min(game.radii[i] > 0.0 ? 1.0 / game.radii[i]
                                             : std::numeric_limits<double>::infinity(),
                         static_cast<double>(game.H - h));
            for (const std::vector<value_vector>* values : {&mix, &br}) {
                const value_vector& v = (*values)[h];
                const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
                worst = std::max(worst, (*hi - *lo) - bound);
            }
        }
    }
    if (max_excess) *max_excess = worst;
    return worst <= tol::value;
}

} // namespace rmglab
