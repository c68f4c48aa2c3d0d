#pragma once

#include <cstdint>
#include <vector>

namespace rmglab {

using prob_row = std::vector<double>;     // probability vector over states or actions
using value_vector = std::vector<double>; // per-state scalars, units of cumulative reward

/// Mixed-radix encoding of joint actions. Agent 0 is the most-significant digit;
/// this ordering is a bit-exact contract shared with the file format.
struct joint_action_codec {
    std::vector<int> radices; // A_i per agent

    int size() const {
        int m = 1;
        for (int a : radices) m *= a;
        return m;
    }

    int encode(const std::vector<int>& actions) const {
        int index = 0;
        for (std::size_t j = 0; j < radices.size(); ++j) index = index * radices[j] + actions[j];
        return index;
    }

    std::vector<int> decode(int index) const {
        std::vector<int> actions(radices.size());
        for (std::size_t j = radices.size(); j-- > 0;) {
            actions[j] = index % radices[j];
            index /= radices[j];
        }
        return actions;
    }
};

/// Finite-horizon robust Markov game: nominal dynamics and rewards plus one
/// total-variation uncertainty radius per agent. Steps are 0-based in code
/// (step h here is step h+1 in 1-based counting); joint actions are codec-encoded.
struct robust_markov_game {
    int n = 0; // agents
    int H = 0; // horizon (steps 0..H-1)
    int S = 0; // states
    std::vector<int> actions;  // A_i per agent
    std::vector<double> radii; // sigma_i in (0,1]

    // kernel[h][s][ja] is the nominal next-state distribution, a row over S
    std::vector<std::vector<std::vector<prob_row>>> kernel;
    // rewards[i][h][s][ja] in [0,1]
    std::vector<std::vector<std::vector<std::vector<double>>>> rewards;

    joint_action_codec codec() const { return joint_action_codec{actions}; }
    int joint_actions() const { return codec().size(); }
    int sum_actions() const {
        int t = 0;
        for (int a : actions) t += a;
        return t;
    }
};

/// Per-step product policy slice: rows[i][s] is agent i's action distribution at s.
struct policy_step {
    std::vector<std::vector<prob_row>> rows;
};

/// Full product policy: rows[i][h][s] is agent i's action distribution at (h, s).
struct product_policy {
    std::vector<std::vector<std::vector<prob_row>>> rows;
};

/// Distribution over K stored product policies, one weight row per step.
/// Learner output carries the mixture weights alpha_k^K.
struct policy_mixture {
    int n = 0, H = 0, S = 0, K = 0;
    std::vector<int> actions;
    std::vector<std::vector<double>> weights;    // [h][k]
    std::vector<std::vector<policy_step>> steps; // [h][k]

    /// Assembles the product policy that plays slice k_h at step h.
    product_policy assemble(const std::vector<int>& ks) const;
};

/// Throws rmg_error unless every game invariant holds: probability rows within
/// simplex tolerance (no silent renormalization), rewards in [0,1], radii in (0,1],
/// and consistent dimensions.
void validate_game(const robust_markov_game& game);

/// Validates a policy against the game's dimensions and simplex tolerance.
void validate_policy(const robust_markov_game& game, const product_policy& policy);

/// Validates a mixture's self-contained invariants: consistent header dimensions,
/// weight rows and policy rows within simplex tolerance, K identical across steps.
void validate_mixture(const policy_mixture& mixture);

/// validate_mixture plus a dimension check against the game.
void validate_mixture(const robust_markov_game& game, const policy_mixture& mixture);

/// Nominal kernel row at (h,s) with agent i pinned to a_i and every other agent j
/// integrated out under other_rows[j] (a distribution over A_j; slot i is ignored).
prob_row expected_kernel_row(const robust_markov_game& game, int h, int s, int i, int a_i,
                             const std::vector<prob_row>& other_rows);

/// Expected reward of agent i at (h,s,a_i) with the other agents integrated out.
double expected_reward(const robust_markov_game& game, int h, int s, int i, int a_i,
                       const std::vector<prob_row>& other_rows);

struct game_spec {
    int n = 2, H = 3, S = 3;
    std::vector<int> actions = {2, 2};
    std::vector<double> radii = {0.3, 0.3};
    std::uint64_t seed = 1;
};

/// Seed-deterministic random game: kernel rows are symmetric Dirichlet(1) draws,
/// rewards are uniform on [0,1]. The output always passes validate_game.
robust_markov_game random_game(const game_spec& spec);

} // namespace rmglab
