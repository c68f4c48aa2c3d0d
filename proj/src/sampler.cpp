#include "rmglab/sampler.hpp"

#include "rmglab/errors.hpp"

namespace rmglab {

empirical_model n_sample_estimation(const generative_model& model, const policy_step& pi_h,
                                    int i, int h, int k, int N, exec policy) {
    const robust_markov_game& game = model.game();
    if (N < 1) throw rmg_error(error_kind::invalid_config, "n_sample_estimation needs N >= 1");
    if (i < 0 || i >= game.n || h < 0 || h >= game.H)
        throw rmg_error(error_kind::dimension_mismatch, "agent or step index out of range");
    if (static_cast<int>(pi_h.rows.size()) != game.n)
        throw rmg_error(error_kind::dimension_mismatch, "step policy has wrong agent count");

    const int S = game.S;
    const int A = game.actions[i];
    const joint_action_codec codec = game.codec();

    empirical_model emp;
    emp.S = S;
    emp.A = A;
    emp.N = N;
    emp.r_hat.assign(S, std::vector<double>(A, 0.0));
    emp.counts.assign(S, std::vector<std::vector<int>>(A, std::vector<int>(S, 0)));
    emp.p_hat.assign(S, std::vector<prob_row>(A, prob_row(S, 0.0)));

    auto cell = [&](int s, int a) {
        std::vector<int> joint(game.n);
        joint[i] = a;
        double reward_sum = 0.0;
        std::vector<int>& count_row = emp.counts[s][a];
        for (int t = 0; t < N; ++t) {
            rng_stream stream = model.stream(h, k, i, s, a, t);
            for (int j = 0; j < game.n; ++j)
                if (j != i) joint[j] = sample_categorical(pi_h.rows[j][s], stream);
            const int ja = codec.encode(joint);
            reward_sum += game.rewards[i][h][s][ja];
            ++count_row[model.sample_next_state(h, s, ja, stream)];
        }
        emp.r_hat[s][a] = reward_sum / N;
        prob_row& p = emp.p_hat[s][a];
        for (int sp = 0; sp < S; ++sp) p[sp] = static_cast<double>(count_row[sp]) / N;
    };

    if (policy == exec::serial) {
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) cell(s, a);
        return emp;
    }
    const long long cells = static_cast<long long>(S) * A;
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (long long c = 0; c < cells; ++c) cell(static_cast<int>(c / A), static_cast<int>(c % A));
    return emp;
}

} // namespace rmglab
