#include "rmglab/game.hpp"

#include <cmath>
#include <string>

#include "rmglab/errors.hpp"
#include "rmglab/rng.hpp"
#include "rmglab/tolerances.hpp"

namespace rmglab {

namespace {

void check_simplex_row(const prob_row& row, const std::string& location) {
    if (row.empty())
        throw rmg_error(error_kind::empty_vector, "empty probability row at " + location);
    double sum = 0.0;
    for (double p : row) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw rmg_error(error_kind::invalid_simplex_row,
                            "negative or non-finite entry at " + location);
        sum += p;
    }
    double deviation = std::abs(sum - 1.0);
    if (deviation > tol::simplex)
        throw rmg_error(error_kind::invalid_simplex_row,
                        "row sum " + std::to_string(sum) + " deviates by " +
                            std::to_string(deviation) + " at " + location);
}

} // namespace

product_policy policy_mixture::assemble(const std::vector<int>& ks) const {
    product_policy out;
    out.rows.assign(n, {});
    for (int i = 0; i < n; ++i) {
        out.rows[i].assign(H, {});
        for (int h = 0; h < H; ++h) out.rows[i][h] = steps[h][ks[h]].rows[i];
    }
    return out;
}

void validate_game(const robust_markov_game& game) {
    if (game.n < 1 || game.H < 1 || game.S < 1)
        throw rmg_error(error_kind::dimension_mismatch, "n, H, S must all be >= 1");
    if (static_cast<int>(game.actions.size()) != game.n)
        throw rmg_error(error_kind::dimension_mismatch, "actions list size != n");
    for (int a : game.actions)
        if (a < 1) throw rmg_error(error_kind::dimension_mismatch, "agent action count < 1");
    if (static_cast<int>(game.radii.size()) != game.n)
        throw rmg_error(error_kind::dimension_mismatch, "radii list size != n");
    for (int i = 0; i < game.n; ++i) {
        double sigma = game.radii[i];
        if (!(sigma > 0.0) || !(sigma <= 1.0) || !std::isfinite(sigma))
            throw rmg_error(error_kind::radius_out_of_range,
                            "radius of agent " + std::to_string(i) + " is " +
                                std::to_string(sigma) + ", must lie in (0,1]");
    }

    const int JA = game.joint_actions();
    if (static_cast<int>(game.kernel.size()) != game.H)
        throw rmg_error(error_kind::dimension_mismatch, "kernel has wrong step count");
    for (int h = 0; h < game.H; ++h) {
        if (static_cast<int>(game.kernel[h].size()) != game.S)
            throw rmg_error(error_kind::dimension_mismatch, "kernel has wrong state count");
        for (int s = 0; s < game.S; ++s) {
            if (static_cast<int>(game.kernel[h][s].size()) != JA)
                throw rmg_error(error_kind::dimension_mismatch,
                                "kernel has wrong joint-action count");
            for (int ja = 0; ja < JA; ++ja) {
                const prob_row& row = game.kernel[h][s][ja];
                if (static_cast<int>(row.size()) != game.S)
                    throw rmg_error(error_kind::dimension_mismatch, "kernel row length != S");
                check_simplex_row(row, "kernel[h=" + std::to_string(h) + ",s=" +
                                           std::to_string(s) + ",a=" + std::to_string(ja) + "]");
            }
        }
    }

    if (static_cast<int>(game.rewards.size()) != game.n)
        throw rmg_error(error_kind::dimension_mismatch, "rewards have wrong agent count");
    for (int i = 0; i < game.n; ++i) {
        if (static_cast<int>(game.rewards[i].size()) != game.H)
            throw rmg_error(error_kind::dimension_mismatch, "rewards have wrong step count");
        for (int h = 0; h < game.H; ++h) {
            if (static_cast<int>(game.rewards[i][h].size()) != game.S)
                throw rmg_error(error_kind::dimension_mismatch, "rewards have wrong state count");
            for (int s = 0; s < game.S; ++s) {
                if (static_cast<int>(game.rewards[i][h][s].size()) != JA)
                    throw rmg_error(error_kind::dimension_mismatch,
                                    "rewards have wrong joint-action count");
                for (int ja = 0; ja < JA; ++ja) {
                    double r = game.rewards[i][h][s][ja];
                    if (!(r >= 0.0) || !(r <= 1.0) || !std::isfinite(r))
                        throw rmg_error(error_kind::reward_out_of_range,
                                        "reward " + std::to_string(r) + " at [i=" +
                                            std::to_string(i) + ",h=" + std::to_string(h) +
                                            ",s=" + std::to_string(s) + ",a=" +
                                            std::to_string(ja) + "] outside [0,1]");
                }
            }
        }
    }
}

void validate_policy(const robust_markov_game& game, const product_policy& policy) {
    if (static_cast<int>(policy.rows.size()) != game.n)
        throw rmg_error(error_kind::dimension_mismatch, "policy has wrong agent count");
    for (int i = 0; i < game.n; ++i) {
        if (static_cast<int>(policy.rows[i].size()) != game.H)
            throw rmg_error(error_kind::dimension_mismatch, "policy has wrong step count");
        for (int h = 0; h < game.H; ++h) {
            if (static_cast<int>(policy.rows[i][h].size()) != game.S)
                throw rmg_error(error_kind::dimension_mismatch, "policy has wrong state count");
            for (int s = 0; s < game.S; ++s) {
                const prob_row& row = policy.rows[i][h][s];
                if (static_cast<int>(row.size()) != game.actions[i])
                    throw rmg_error(error_kind::dimension_mismatch, "policy row length != A_i");
                check_simplex_row(row, "policy[i=" + std::to_string(i) + ",h=" +
                                           std::to_string(h) + ",s=" + std::to_string(s) + "]");
            }
        }
    }
}

void validate_mixture(const policy_mixture& mixture) {
    if (mixture.n < 1 || mixture.H < 1 || mixture.S < 1 ||
        static_cast<int>(mixture.actions.size()) != mixture.n)
        throw rmg_error(error_kind::dimension_mismatch, "mixture header dimensions inconsistent");
    if (mixture.K < 1) throw rmg_error(error_kind::dimension_mismatch, "mixture needs K >= 1");
    if (static_cast<int>(mixture.weights.size()) != mixture.H ||
        static_cast<int>(mixture.steps.size()) != mixture.H)
        throw rmg_error(error_kind::dimension_mismatch, "mixture has wrong step count");
    for (int h = 0; h < mixture.H; ++h) {
        if (static_cast<int>(mixture.weights[h].size()) != mixture.K ||
            static_cast<int>(mixture.steps[h].size()) != mixture.K)
            throw rmg_error(error_kind::dimension_mismatch, "mixture slice count != K");
        check_simplex_row(mixture.weights[h], "mixture weights[h=" + std::to_string(h) + "]");
        for (int k = 0; k < mixture.K; ++k) {
            const policy_step& step = mixture.steps[h][k];
            if (static_cast<int>(step.rows.size()) != mixture.n)
                throw rmg_error(error_kind::dimension_mismatch, "mixture slice agent count");
            for (int i = 0; i < mixture.n; ++i) {
                if (static_cast<int>(step.rows[i].size()) != mixture.S)
                    throw rmg_error(error_kind::dimension_mismatch, "mixture slice state count");
                for (int s = 0; s < mixture.S; ++s) {
                    if (static_cast<int>(step.rows[i][s].size()) != mixture.actions[i])
                        throw rmg_error(error_kind::dimension_mismatch,
                                        "mixture slice row length != A_i");
                    check_simplex_row(step.rows[i][s],
                                      "mixture[h=" + std::to_string(h) + ",k=" +
                                          std::to_string(k) + ",i=" + std::to_string(i) +
                                          ",s=" + std::to_string(s) + "]");
                }
            }
        }
    }
}

void validate_mixture(const robust_markov_game& game, const policy_mixture& mixture) {
    validate_mixture(mixture);
    if (mixture.n != game.n || mixture.H != game.H || mixture.S != game.S ||
        mixture.actions != game.actions)
        throw rmg_error(error_kind::dimension_mismatch, "mixture dimensions disagree with game");
}

namespace {

// Enumerates the other agents' joint actions with agent i pinned to a_i, calling
// visit(joint_index, product_weight) for each combination with positive weight
// structure. Recursion depth is n; weights multiply in agent order.
template <typename Visit>
void for_each_joint(const robust_markov_game& game, int i, int a_i,
                    const std::vector<prob_row>& other_rows, Visit&& visit) {
    std::vector<int> joint(game.n, 0);
    joint[i] = a_i;
    const joint_action_codec codec = game.codec();
    // iterative mixed-radix counter over agents j != i
    std::vector<int> others;
    others.reserve(game.n - 1);
    for (int j = 0; j < game.n; ++j)
        if (j != i) others.push_back(j);
    while (true) {
        double w = 1.0;
        for (int j : others) w *= other_rows[j][joint[j]];
        visit(codec.encode(joint), w);
        int pos = static_cast<int>(others.size()) - 1;
        while (pos >= 0) {
            int j = others[pos];
            if (++joint[j] < game.actions[j]) break;
            joint[j] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
}

void check_other_rows(const robust_markov_game& game, int h, int s, int i, int a_i,
                      const std::vector<prob_row>& other_rows) {
    if (h < 0 || h >= game.H || s < 0 || s >= game.S || i < 0 || i >= game.n || a_i < 0 ||
        a_i >= game.actions[i])
        throw rmg_error(error_kind::dimension_mismatch, "index out of range");
    if (static_cast<int>(other_rows.size()) != game.n)
        throw rmg_error(error_kind::dimension_mismatch,
                        "other_rows must have one slot per agent (slot i ignored)");
    for (int j = 0; j < game.n; ++j) {
        if (j == i) continue;
        if (static_cast<int>(other_rows[j].size()) != game.actions[j])
            throw rmg_error(error_kind::dimension_mismatch, "other agent row length != A_j");
    }
}

} // namespace

prob_row expected_kernel_row(const robust_markov_game& game, int h, int s, int i, int a_i,
                             const std::vector<prob_row>& other_rows) {
    check_other_rows(game, h, s, i, a_i, other_rows);
    prob_row out(game.S, 0.0);
    for_each_joint(game, i, a_i, other_rows, [&](int ja, double w) {
        const prob_row& row = game.kernel[h][s][ja];
        for (int sp = 0; sp < game.S; ++sp) out[sp] += w * row[sp];
    });
    return out;
}

double expected_reward(const robust_markov_game& game, int h, int s, int i, int a_i,
                       const std::vector<prob_row>& other_rows) {
    check_other_rows(game, h, s, i, a_i, other_rows);
    double out = 0.0;
    for_each_joint(game, i, a_i, other_rows,
                   [&](int ja, double w) { out += w * game.rewards[i][h][s][ja]; });
    return out;
}

robust_markov_game random_game(const game_spec& spec) {
    if (spec.n < 1 || spec.H < 1 || spec.S < 1)
        throw rmg_error(error_kind::dimension_mismatch, "game spec sizes must be >= 1");
    if (static_cast<int>(spec.actions.size()) != spec.n ||
        static_cast<int>(spec.radii.size()) != spec.n)
        throw rmg_error(error_kind::dimension_mismatch,
                        "game spec actions/radii must list one entry per agent");

    robust_markov_game game;
    game.n = spec.n;
    game.H = spec.H;
    game.S = spec.S;
    game.actions = spec.actions;
    game.radii = spec.radii;

    const int JA = game.joint_actions();

    // Dirichlet(1) row: normalized unit exponentials, one keyed stream per row entry
    // so construction order never matters.
    game.kernel.assign(game.H, std::vector<std::vector<prob_row>>(
                                   game.S, std::vector<prob_row>(JA, prob_row(game.S, 0.0))));
    for (int h = 0; h < game.H; ++h)
        for (int s = 0; s < game.S; ++s)
            for (int ja = 0; ja < JA; ++ja) {
                prob_row& row = game.kernel[h][s][ja];
                double total = 0.0;
                for (int sp = 0; sp < game.S; ++sp) {
                    rng_stream stream{spec.seed,
                                      stream_tag::game_kernel,
                                      static_cast<std::uint64_t>(h),
                                      static_cast<std::uint64_t>(s),
                                      static_cast<std::uint64_t>(ja),
                                      static_cast<std::uint64_t>(sp)};
                    row[sp] = -std::log(stream.next_double_open());
                    total += row[sp];
                }
                for (int sp = 0; sp < game.S; ++sp) row[sp] /= total;
            }

    game.rewards.assign(
        game.n, std::vector<std::vector<std::vector<double>>>(
                    game.H, std::vector<std::vector<double>>(game.S, std::vector<double>(JA))));
    for (int i = 0; i < game.n; ++i)
        for (int h = 0; h < game.H; ++h)
            for (int s = 0; s < game.S; ++s)
                for (int ja = 0; ja < JA; ++ja) {
                    rng_stream stream{spec.seed,
                                      stream_tag::game_reward,
                                      static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(h),
                                      static_cast<std::uint64_t>(s),
                                      static_cast<std::uint64_t>(ja)};
                    game.rewards[i][h][s][ja] = stream.next_double();
                }

    validate_game(game);
    return game;
}

} // namespace rmglab
