// Benchmarks the OpenMP-parallel hot kernels against their serial reference
// implementations and verifies the outputs are bitwise identical.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "rmglab/bellman.hpp"
#include "rmglab/game.hpp"
#include "rmglab/parallel.hpp"
#include "rmglab/rng.hpp"
#include "rmglab/sampler.hpp"

namespace {

using namespace rmglab;

template <typename Fn>
double best_seconds(int reps, Fn&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                              .count();
        if (dt < best) best = dt;
    }
    return best;
}

void print_row(const char* name, long long items, double serial_s, double parallel_s,
               bool identical) {
    std::printf("%-22s %10lld %12.3f %12.3f %9.2fx %10s\n", name, items, serial_s * 1e3,
                parallel_s * 1e3, serial_s / parallel_s, identical ? "yes" : "NO");
}

} // namespace

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
    const int reps = quick ? 2 : 5;

    std::printf("threads available: %d\n\n", thread_count());
    std::printf("%-22s %10s %12s %12s %9s %10s\n", "kernel", "items", "serial ms",
                "parallel ms", "speedup", "identical");

    // batch_tv_support: many independent dual evaluations.
    {
        const int S = quick ? 24 : 64;
        const int R = quick ? 2000 : 20000;
        rng_stream stream{42, stream_tag::oracle, 0};
        std::vector<prob_row> rows(R, prob_row(S));
        for (auto& row : rows) {
            double total = 0.0;
            for (double& p : row) {
                p = -std::log(stream.next_double_open());
                total += p;
            }
            for (double& p : row) p /= total;
        }
        value_vector v(S);
        for (double& x : v) x = 3.0 * stream.next_double();

        std::vector<double> serial_out, parallel_out;
        const double ts = best_seconds(reps, [&] {
            serial_out = batch_tv_support(rows, v, 0.3, exec::serial);
        });
        const double tp = best_seconds(reps, [&] {
            parallel_out = batch_tv_support(rows, v, 0.3, exec::parallel);
        });
        print_row("batch_tv_support", R, ts, tp, serial_out == parallel_out);
    }

    // n_sample_estimation: heavy per-cell sampling.
    {
        game_spec spec;
        spec.n = 2;
        spec.H = 2;
        spec.S = quick ? 6 : 12;
        spec.actions = {quick ? 4 : 6, quick ? 4 : 6};
        spec.radii = {0.3, 0.3};
        spec.seed = 7;
        const robust_markov_game game = random_game(spec);
        const generative_model model(game, 11);
        policy_step uniform;
        uniform.rows.assign(game.n, {});
        for (int j = 0; j < game.n; ++j)
            uniform.rows[j].assign(game.S, prob_row(game.actions[j], 1.0 / game.actions[j]));
        const int N = quick ? 500 : 2000;

        empirical_model serial_out, parallel_out;
        const double ts = best_seconds(reps, [&] {
            serial_out = n_sample_estimation(model, uniform, 0, 0, 0, N, exec::serial);
        });
        const double tp = best_seconds(reps, [&] {
            parallel_out = n_sample_estimation(model, uniform, 0, 0, 0, N, exec::parallel);
        });
        const bool identical = serial_out.r_hat == parallel_out.r_hat &&
                               serial_out.counts == parallel_out.counts &&
                               serial_out.p_hat == parallel_out.p_hat;
        print_row("n_sample_estimation", static_cast<long long>(game.S) * game.actions[0] * N,
                  ts, tp, identical);
    }

    // robust_backup: expected-row reduction plus dual per (s, a_i) cell.
    {
        game_spec spec;
        spec.n = 2;
        spec.H = 2;
        spec.S = quick ? 12 : 24;
        spec.actions = {quick ? 4 : 8, quick ? 4 : 8};
        spec.radii = {0.3, 0.3};
        spec.seed = 9;
        const robust_markov_game game = random_game(spec);
        policy_step uniform;
        uniform.rows.assign(game.n, {});
        for (int j = 0; j < game.n; ++j)
            uniform.rows[j].assign(game.S, prob_row(game.actions[j], 1.0 / game.actions[j]));
        value_vector v(game.S);
        rng_stream stream{43, stream_tag::oracle, 1};
        for (double& x : v) x = stream.next_double();

        std::vector<std::vector<double>> serial_out, parallel_out;
        const double ts = best_seconds(reps, [&] {
            serial_out = robust_backup(game, 0, 0, v, uniform, exec::serial);
        });
        const double tp = best_seconds(reps, [&] {
            parallel_out = robust_backup(game, 0, 0, v, uniform, exec::parallel);
        });
        print_row("robust_backup", static_cast<long long>(game.S) * game.actions[0], ts, tp,
                  serial_out == parallel_out);
    }

    std::printf("\nnote: speedup tracks the available cores; on one core it stays near 1.\n");
    return 0;
}
