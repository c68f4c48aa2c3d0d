#pragma once

#include <atomic>
#include <cstdint>

#include "rmglab/game.hpp"
#include "rmglab/parallel.hpp"
#include "rmglab/rng.hpp"

namespace rmglab {

/// Inverse-CDF draw from a probability row via its running prefix sum; the final
/// bucket absorbs any floating-point residue, so no normalization drift.
inline int sample_categorical(const prob_row& row, rng_stream& stream) {
    const double u = stream.next_double();
    double cum = 0.0;
    const int last = static_cast<int>(row.size()) - 1;
    for (int j = 0; j < last; ++j) {
        cum += row[j];
        if (u < cum) return j;
    }
    return last;
}

/// Seeded simulator over the nominal dynamics. Draw streams are keyed by
/// (seed, h, k, i, s, a_i, t), so any cell's samples are reproducible in
/// isolation and independent of every other cell's consumption order.
/// The query counter tracks next-state draws served (sample accounting).
class generative_model {
  public:
    generative_model(const robust_markov_game& game, std::uint64_t seed)
        : game_(&game), seed_(seed) {}

    const robust_markov_game& game() const { return *game_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t queries() const { return queries_.load(); }

    rng_stream stream(int h, int k, int i, int s, int a_i, int t) const {
        return rng_stream{seed_,
                          stream_tag::sample,
                          static_cast<std::uint64_t>(h),
                          static_cast<std::uint64_t>(k),
                          static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(s),
                          static_cast<std::uint64_t>(a_i),
                          static_cast<std::uint64_t>(t)};
    }

    /// One generative query: next state from the nominal kernel at (h, s, joint action).
    int sample_next_state(int h, int s, int joint_a, rng_stream& stream) const {
        queries_.fetch_add(1, std::memory_order_relaxed);
        return sample_categorical(game_->kernel[h][s][joint_a], stream);
    }

  private:
    const robust_markov_game* game_;
    std::uint64_t seed_;
    mutable std::atomic<std::uint64_t> queries_{0};
};

/// Per-(s, a_i) estimates from N joint draws. Counts are the primary data: each
/// next-state row sums to exactly N, so the derived probability rows are exact
/// integer multiples of 1/N.
struct empirical_model {
    int S = 0, A = 0, N = 0;
    std::vector<std::vector<double>> r_hat;             // [s][a] in [0,1]
    std::vector<std::vector<std::vector<int>>> counts;  // [s][a][s'], row sums == N
    std::vector<std::vector<prob_row>> p_hat;           // [s][a], counts / N

    const prob_row& row(int s, int a) const { return p_hat[s][a]; }
};

/// Per-cell estimation: for each (s, a_i), draws N joint actions with agent i
/// pinned to a_i and every other agent j sampling from pi_h.rows[j][s], records
/// the deterministic reward of the drawn joint action and the sampled next state.
/// Consumes exactly N*S*A_i generative queries. k is the caller's iteration index
/// entering the stream key (pass 0 outside an iterative loop).
empirical_model n_sample_estimation(const generative_model& model, const policy_step& pi_h,
                                    int i, int h, int k, int N, exec policy = exec::parallel);

} // namespace rmglab
