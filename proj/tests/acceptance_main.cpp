// Acceptance gate: nine end-to-end criteria, one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rmglab/bellman.hpp"
#include "rmglab/evaluator.hpp"
#include "rmglab/game.hpp"
#include "rmglab/game_io.hpp"
#include "rmglab/learner.hpp"
#include "rmglab/learner_checks.hpp"
#include "rmglab/sampler.hpp"
#include "rmglab/schedule.hpp"
#include "test_support.hpp"

using namespace rmglab;
using namespace testsup;
namespace fs = std::filesystem;

namespace {

struct criterion_result {
    bool pass = false;
    std::string measured;
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median_of(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::string fmt(const char* pattern, ...) {
    char buffer[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buffer, sizeof buffer, pattern, args);
    va_end(args);
    return buffer;
}

policy_step uniform_step(const robust_markov_game& game) {
    policy_step step;
    step.rows.resize(game.n);
    for (int j = 0; j < game.n; ++j)
        step.rows[j].assign(game.S, prob_row(game.actions[j], 1.0 / game.actions[j]));
    return step;
}

// --- 1: dual-primal equality over 10,000 random triples ----------------------

criterion_result criterion_dual_primal() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        const int S = 2 + t % 15; // S in {2,...,16}
        const inner_triple triple = random_inner_triple(S, 1001, static_cast<std::uint64_t>(t));
        const double dual = tv_support_value(triple.p0, triple.v, triple.sigma);
        const double lp = lp_inner_min_oracle(triple.p0, triple.v, triple.sigma);
        worst = std::max(worst, std::abs(dual - lp));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-9 && secs < 10.0,
            fmt("max |dual - lp| = %.3e over %d triples in %.2f s (limits 1e-9, 10 s)", worst,
                trials, secs)};
}

// --- 2: sigma = 0 reduction to the standard DP --------------------------------

criterion_result criterion_sigma_zero() {
    double worst = 0.0;
    int exact_mismatches = 0;
    for (int t = 0; t < 100; ++t) {
        game_spec spec;
        spec.n = 2;
        spec.S = 2 + t % 3;                       // S <= 4
        spec.H = 1 + t % 4;                       // H <= 4
        spec.actions = {1 + t % 3, 2};
        spec.seed = 2000 + static_cast<std::uint64_t>(t);
        const robust_markov_game g = with_radii(random_game(spec), 0.0);
        const product_policy policy = random_product_policy(g, 2100 + t);
        for (int i = 0; i < g.n; ++i) {
            const auto fast = robust_policy_value(g, policy, i);
            const auto oracle = standard_policy_value(g, policy, i);
            for (int h = 0; h <= g.H; ++h)
                for (int s = 0; s < g.S; ++s)
                    worst = std::max(worst, std::abs(fast[h][s] - oracle[h][s]));
        }

        // estimate_robust_q at sigma = 0 must reduce to r_hat + P_hat . V exactly.
        if (t < 20) {
            const generative_model model(g, 2200 + static_cast<std::uint64_t>(t));
            const empirical_model emp =
                n_sample_estimation(model, uniform_step(g), 0, 0, 0, 16);
            value_vector v(g.S);
            rng_stream stream{2300 + static_cast<std::uint64_t>(t), 0};
            for (double& x : v) x = g.H * stream.next_double();
            const q_table q = estimate_robust_q(emp, v, 0.0);
            for (int s = 0; s < g.S; ++s)
                for (int a = 0; a < g.actions[0]; ++a)
                    if (q[s][a] != emp.r_hat[s][a] + dot(emp.p_hat[s][a], v)) ++exact_mismatches;
        }
    }
    return {worst <= 1e-9 && exact_mismatches == 0,
            fmt("max |robust - standard DP| = %.3e over 100 games (limit 1e-9); "
                "%d bitwise mismatches in r_hat + P_hat.V (limit 0)",
                worst, exact_mismatches)};
}

// --- 3: schedule identities at 1e-12 ------------------------------------------

criterion_result criterion_schedule() {
    double worst = 0.0;   // worst equality-identity deviation
    bool bounds_ok = true; // inequality identities
    for (int K : {64, 256, 1024, 4096}) {
        for (int H : {1, 2, 3}) {
            const schedule sch = build_schedule(K, H, 24.0);
            const double log_K = std::log(static_cast<double>(K));

            worst = std::max(worst, std::abs(sch.alpha[0] - 1.0));
            worst = std::max(worst, std::abs(kahan_sum(sch.alpha_K) - 1.0));
            worst = std::max(worst, std::abs(sch.alpha_K[K - 1] - sch.alpha[K - 1]));

            double max_w = 0.0;
            for (double w : sch.alpha_K) max_w = std::max(max_w, w);
            bounds_ok = bounds_ok && max_w <= 2.0 * 24.0 * log_K / K;

            const int k0 = static_cast<int>(std::ceil(24.0 * log_K + 1.0));
            if ((K == 256 || K == 1024) && k0 <= K) {
                const std::vector<double> w = alpha_weights(sch.alpha, k0);
                double head = 0.0;
                for (int i = 1; i <= k0 / 2; ++i) head = std::max(head, w[i - 1]);
                bounds_ok = bounds_ok && head <= std::pow(static_cast<double>(K), -6.0);
            }

            for (int k = 1; k <= K; ++k) {
                const double sq = sch.eta[k - 1] * sch.eta[k - 1];
                worst = std::max(worst, std::abs(sq * sch.alpha[k - 1] * H - log_K));
                if (k >= 2) {
                    const double eta_k = sch.eta[k - 2], eta_k1 = sch.eta[k - 1];
                    const double a_k = sch.alpha[k - 1];
                    const double ratio_sq = (eta_k / eta_k1) * (eta_k / eta_k1);
                    bounds_ok = bounds_ok && ratio_sq > (1.0 - a_k) * (1.0 - a_k);
                    bounds_ok = bounds_ok &&
                                eta_k * a_k <=
                                    std::sqrt(2.0 * 24.0 * log_K * log_K / (k * H)) + 1e-12;
                }
            }
        }
    }
    return {worst <= 1e-12 && bounds_ok,
            fmt("max identity deviation %.3e (limit 1e-12); rate bounds %s", worst,
                bounds_ok ? "hold" : "VIOLATED")};
}

// --- 4: deterministic optimism and the FTRL regret bound ----------------------

criterion_result criterion_optimism() {
    struct setting {
        int K, N;
        std::uint64_t seed;
    };
    const std::vector<setting> settings{{1024, 4, 1}, {1024, 16, 2}, {2048, 2, 3}};
    const robust_markov_game g = random_game(game_spec{}); // default desk game, H = 3

    double worst_optimism = 0.0, worst_regret = 0.0;
    bool all_met = true;
    for (const setting& run : settings) {
        learner_config config;
        config.K = run.K;
        config.N = run.N;
        config.seed = run.seed;
        config.c_b = 1.0;
        config.archive = true;
        const learner_output out = robust_q_ftrl(g, config);
        const invariant_report rep = check_learner_invariants(g, out);
        all_met = all_met && rep.k_condition_met;
        worst_optimism = std::max(worst_optimism, rep.max_optimism_violation);
        worst_regret = std::max(worst_regret, rep.max_regret_excess);
    }
    return {worst_optimism <= 1e-9 && worst_regret <= 1e-9 && all_met,
            fmt("3 archived runs at K >= 1024: max optimism violation %.3e, "
                "max regret excess over beta %.3e (limits 1e-9)",
                worst_optimism, worst_regret)};
}

// --- 5: span bounds on 50 random games -----------------------------------------

criterion_result criterion_spans() {
    double worst = -1.0;
    for (int t = 0; t < 50; ++t) {
        game_spec spec;
        spec.S = 2 + t % 3;
        spec.H = 2 + t % 3;
        spec.actions = {2, 1 + t % 3};
        spec.radii = {0.15 + 0.05 * (t % 14), 0.2 + 0.05 * (t % 13)};
        spec.seed = 5000 + static_cast<std::uint64_t>(t);
        const robust_markov_game g = random_game(spec);
        const policy_mixture mixture = random_mixture(g, 1 + t % 3, 5100 + t);
        double excess = 0.0;
        evaluator_spans_ok(g, mixture, &excess);
        worst = std::max(worst, excess);
    }
    return {worst <= 1e-9,
            fmt("max span excess over min{1/sigma, H-h} = %.3e on 50 games (limit 1e-9)",
                worst)};
}

// --- 6: single-controller exactness and the learner's convergence against it ---

criterion_result criterion_single_agent() {
    const auto t0 = std::chrono::steady_clock::now();
    game_spec spec;
    spec.n = 2;
    spec.S = 3;
    spec.H = 3;
    spec.actions = {3, 1};
    spec.radii = {0.3, 0.3};
    spec.seed = 42;
    const robust_markov_game g = random_game(spec);

    // Exact part: the best response equals LP value iteration.
    product_policy other;
    other.rows.assign(g.n, {});
    other.rows[1].assign(g.H, std::vector<prob_row>(g.S, prob_row{1.0}));
    const best_response br = robust_best_response(g, other, 0);
    const std::vector<value_vector> vi = lp_robust_vi(g, 0);
    double br_dev = 0.0;
    for (int h = 0; h <= g.H; ++h)
        for (int s = 0; s < g.S; ++s) br_dev = std::max(br_dev, std::abs(br.v[h][s] - vi[h][s]));

    // Trend part: learner gap against the exact optimum, medians over 10 seeds.
    const std::vector<std::pair<int, int>> ladder{{64, 8}, {256, 32}, {1024, 128}};
    std::vector<double> medians;
    for (const auto& [K, N] : ladder) {
        std::vector<double> gaps;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            learner_config config;
            config.K = K;
            config.N = N;
            config.seed = seed;
            config.c_b = 0.1;
            const learner_output out = robust_q_ftrl(g, config);
            const gap_report report = cce_gap(g, out.mixture, gap_method::recursive);
            gaps.push_back(report.per_agent_gap[0]);
        }
        medians.push_back(median_of(gaps));
    }
    const double secs = seconds_since(t0);

    const bool monotone = medians[0] >= medians[1] && medians[1] >= medians[2];
    const bool small = medians[2] < 0.25 * g.H;
    return {br_dev <= 1e-9 && monotone && small && secs < 900.0,
            fmt("BR vs LP-VI max dev %.3e (limit 1e-9); gap medians %.4f -> %.4f -> %.4f "
                "(nonincreasing %s, final < %.2f: %s); %.1f s (limit 900 s)",
                br_dev, medians[0], medians[1], medians[2], monotone ? "yes" : "NO", 0.25 * g.H,
                small ? "yes" : "NO", secs)};
}

// --- 7: desk-scale trend of the CCE gap with exact bookkeeping -----------------

criterion_result criterion_desk_trend() {
    const robust_markov_game g = random_game(game_spec{});
    const std::vector<std::pair<int, int>> ladder{{64, 8}, {128, 16}, {256, 32}, {512, 64}};
    std::vector<double> med_rec, med_mc;
    bool n_all_exact = true;
    for (const auto& [K, N] : ladder) {
        std::vector<double> rec, mc;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            learner_config config;
            config.K = K;
            config.N = N;
            config.seed = seed;
            config.c_b = 0.1;
            const learner_output out = robust_q_ftrl(g, config);
            n_all_exact =
                n_all_exact && out.samples_drawn == static_cast<std::uint64_t>(g.H) * K * N *
                                                        g.S * g.sum_actions();
            rec.push_back(cce_gap(g, out.mixture, gap_method::recursive).overall_gap);
            mc.push_back(
                cce_gap(g, out.mixture, gap_method::monte_carlo, 8000, seed).overall_gap);
        }
        med_rec.push_back(median_of(rec));
        med_mc.push_back(median_of(mc));
    }
    bool monotone = true;
    for (std::size_t j = 1; j < med_rec.size(); ++j)
        monotone = monotone && med_rec[j] <= med_rec[j - 1] && med_mc[j] <= med_mc[j - 1];
    return {monotone && n_all_exact,
            fmt("recursive medians %.4f/%.4f/%.4f/%.4f, mc medians %.4f/%.4f/%.4f/%.4f "
                "(nonincreasing %s); N_all bookkeeping exact: %s",
                med_rec[0], med_rec[1], med_rec[2], med_rec[3], med_mc[0], med_mc[1], med_mc[2],
                med_mc[3], monotone ? "yes" : "NO", n_all_exact ? "yes" : "NO")};
}

// --- 8: Monte-Carlo vs enumeration, and sigma = 0 vs the recursion -------------

criterion_result criterion_mixture_consistency() {
    const robust_markov_game g = random_game(game_spec{}); // H = 3
    const policy_mixture mixture = random_mixture(g, 2, 8001);

    double worst_z = 0.0;
    const int M = 10000;
    for (int i = 0; i < g.n; ++i) {
        const mc_estimate value_exact = mixture_value_mc(g, mixture, i, 0, 31);
        const mc_estimate value_mc = mixture_value_mc(g, mixture, i, M, 31, exec::parallel, true);
        const mc_estimate br_exact = mixture_best_response_mc(g, mixture, i, 0, 33);
        const mc_estimate br_mc =
            mixture_best_response_mc(g, mixture, i, M, 33, exec::parallel, true);
        for (int s = 0; s < g.S; ++s) {
            worst_z = std::max(worst_z, std::abs(value_mc.mean[s] - value_exact.mean[s]) /
                                            std::max(value_mc.se[s], 1e-12));
            worst_z = std::max(worst_z, std::abs(br_mc.mean[s] - br_exact.mean[s]) /
                                            std::max(br_mc.se[s], 1e-12));
        }
    }

    const robust_markov_game flat = with_radii(g, 0.0);
    double worst_sigma0 = 0.0;
    for (int i = 0; i < flat.n; ++i) {
        const value_vector recursive = mixture_value_recursive(flat, mixture, i)[0];
        const mc_estimate enumerated = mixture_value_mc(flat, mixture, i, 0, 35);
        const value_vector oracle = oracle_sigma0_mixture_value(flat, mixture, i);
        for (int s = 0; s < flat.S; ++s) {
            worst_sigma0 = std::max(worst_sigma0, std::abs(recursive[s] - enumerated.mean[s]));
            worst_sigma0 = std::max(worst_sigma0, std::abs(recursive[s] - oracle[s]));
        }
    }
    return {worst_z <= 3.0 && worst_sigma0 <= 1e-9,
            fmt("MC vs enumeration: max |z| = %.2f at M = %d (limit 3); "
                "sigma = 0 recursion vs enumeration max dev %.3e (limit 1e-9)",
                worst_z, M, worst_sigma0)};
}

// --- 9: byte-identical mixtures from identical CLI invocations -----------------

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<unreadable:" + path.string() + ">";
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

criterion_result criterion_cli_determinism() {
    const fs::path dir = fs::current_path() / "acceptance_scratch";
    fs::remove_all(dir);
    fs::create_directories(dir);

    auto shell = [&](const std::string& args) {
        const std::string cmd = std::string(RMGLAB_CLI_PATH) + " " + args + " > " +
                                (dir / "log.txt").string() + " 2>&1";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };

    const fs::path game_path = dir / "game.json";
    if (shell("gen-game --seed 21 --out " + game_path.string()) != 0)
        return {false, "gen-game failed"};
    const std::string flags = "learn --game " + game_path.string() +
                              " --K 32 --N 4 --seed 5 --mc-samples 40 --out ";
    if (shell(flags + (dir / "a").string()) != 0) return {false, "first learn run failed"};
    if (shell(flags + (dir / "b").string()) != 0) return {false, "second learn run failed"};

    const std::string first = slurp(dir / "a" / "mixture.json");
    const std::string second = slurp(dir / "b" / "mixture.json");
    const bool same = !first.empty() && first == second;
    return {same, fmt("two identical cmd_learn invocations: mixture files %s (%zu bytes)",
                      same ? "byte-identical" : "DIFFER", first.size())};
}

} // namespace

int main() {
    struct named {
        const char* name;
        criterion_result (*run)();
    };
    const std::vector<named> criteria{
        {"dual-primal equality", criterion_dual_primal},
        {"sigma = 0 reduction", criterion_sigma_zero},
        {"schedule identities", criterion_schedule},
        {"deterministic optimism and regret bound", criterion_optimism},
        {"span bounds", criterion_spans},
        {"single-controller exactness and trend", criterion_single_agent},
        {"desk-scale gap trend", criterion_desk_trend},
        {"mixture evaluation consistency", criterion_mixture_consistency},
        {"CLI determinism", criterion_cli_determinism},
    };

    int failures = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t c = 0; c < criteria.size(); ++c) {
        const criterion_result result = criteria[c].run();
        if (!result.pass) ++failures;
        std::printf("%s criterion %zu: %s (%s)\n", result.pass ? "PASS" : "FAIL", c + 1,
                    criteria[c].name, result.measured.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed in %.1f s\n", static_cast<int>(criteria.size()) - failures,
                criteria.size(), seconds_since(t0));
    return failures;
}
