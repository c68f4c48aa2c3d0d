// rmglab: experiment harness for the robust Markov game engine.
// Subcommands: learn / eval / sweep / oracle-check / gen-game.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rmglab/bellman.hpp"
#include "rmglab/csv.hpp"
#include "rmglab/errors.hpp"
#include "rmglab/evaluator.hpp"
#include "rmglab/game.hpp"
#include "rmglab/game_io.hpp"
#include "rmglab/learner.hpp"
#include "rmglab/learner_checks.hpp"
#include "rmglab/parallel.hpp"
#include "rmglab/rng.hpp"
#include "rmglab/sampler.hpp"

namespace {

using namespace rmglab;
using nlohmann::json;

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double projected_samples(const robust_markov_game& game, int K, int N) {
    return static_cast<double>(game.H) * K * N * game.S * game.sum_actions();
}

// ---------------------------------------------------------------------------
// runs.csv bookkeeping
// ---------------------------------------------------------------------------

const std::vector<std::string> kRunColumns = {
    "cell_id", "status",        "K",      "N",     "sigma_min",   "seed",
    "N_all",   "gap_recursive", "gap_mc", "se_mc", "runtime_s",   "optimism_ok",
    "regret_le_bonus_ok",       "span_ok"};

struct run_row {
    std::string cell_id;
    std::string status = "ok";
    int K = 0, N = 0;
    double sigma_min = 0.0;
    std::uint64_t seed = 0;
    std::string n_all, gap_recursive, gap_mc, se_mc, runtime_s;
    std::string optimism_ok, regret_le_bonus_ok, span_ok;
};

std::string format_run_row(const run_row& r) {
    return csv_row({r.cell_id, r.status, std::to_string(r.K), std::to_string(r.N),
                    csv_double(r.sigma_min), std::to_string(r.seed), r.n_all, r.gap_recursive,
                    r.gap_mc, r.se_mc, r.runtime_s, r.optimism_ok, r.regret_le_bonus_ok,
                    r.span_ok});
}

void append_run_rows(const std::string& dir, const std::vector<std::string>& rows) {
    const std::filesystem::path path = std::filesystem::path(dir) / "runs.csv";
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    if (fresh) out << csv_row(kRunColumns);
    for (const std::string& row : rows) out << row;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// learn
// ---------------------------------------------------------------------------

struct learn_args {
    std::string game_path;
    std::string out_dir;
    int K = 256;
    int N = 32;
    double c_alpha = 24.0;
    double c_b = 1.0;
    double delta = 0.05;
    std::uint64_t seed = 1;
    bool archive = false;
    bool force = false;
    int mc_samples = 1000;
};

// One learning run against a loaded game: used by both `learn` and `sweep`.
// Fills the run record; throws on validation/resource failures.
run_row execute_learn_cell(const robust_markov_game& game, const learn_args& a,
                           const std::string& cell_id, learner_output* keep_output,
                           json* manifest) {
    learner_config config;
    config.K = a.K;
    config.N = a.N;
    config.c_alpha = a.c_alpha;
    config.c_b = a.c_b;
    config.delta = a.delta;
    config.seed = a.seed;
    config.archive = a.archive;
    if (a.force) config.sample_budget = std::numeric_limits<double>::infinity();

    run_row row;
    row.cell_id = cell_id;
    row.K = a.K;
    row.N = a.N;
    row.seed = a.seed;
    row.sigma_min = game.radii[0];
    for (double s : game.radii) row.sigma_min = std::min(row.sigma_min, s);

    const auto t0 = std::chrono::steady_clock::now();
    learner_output out = robust_q_ftrl(game, config);
    const double learn_time = seconds_since(t0);

    const gap_report recursive = cce_gap(game, out.mixture, gap_method::recursive);
    const gap_report mc =
        cce_gap(game, out.mixture, gap_method::monte_carlo, a.mc_samples, a.seed);
    double span_excess = 0.0;
    const bool spans = evaluator_spans_ok(game, out.mixture, &span_excess);

    row.n_all = std::to_string(out.samples_drawn);
    row.gap_recursive = csv_double(recursive.overall_gap);
    row.gap_mc = csv_double(mc.overall_gap);
    row.se_mc = csv_double(mc.overall_se);
    row.runtime_s = csv_double(seconds_since(t0));
    row.span_ok = spans ? "true" : "false";

    json doc;
    doc["game"] = a.game_path;
    doc["K"] = a.K;
    doc["N"] = a.N;
    doc["c_alpha"] = a.c_alpha;
    doc["c_b"] = a.c_b;
    doc["delta"] = a.delta;
    doc["seed"] = a.seed;
    doc["archive"] = a.archive;
    doc["n"] = game.n;
    doc["H"] = game.H;
    doc["S"] = game.S;
    doc["actions"] = game.actions;
    doc["radii"] = game.radii;
    doc["N_all"] = out.samples_drawn;
    doc["learn_time_s"] = learn_time;
    doc["wall_time_s"] = seconds_since(t0);
    doc["gap_recursive"] = recursive.overall_gap;
    doc["gap_mc"] = mc.overall_gap;
    doc["se_mc"] = mc.overall_se;
    doc["mc_exact"] = mc.exact;
    doc["mc_samples"] = a.mc_samples;
    doc["span_ok"] = spans;
    doc["span_excess"] = span_excess;

    if (out.archive) {
        const invariant_report rep = check_learner_invariants(game, out);
        row.optimism_ok = rep.optimism_ok ? "true" : "false";
        row.regret_le_bonus_ok = rep.regret_le_bonus_ok ? "true" : "false";
        doc["optimism_ok"] = rep.optimism_ok;
        doc["br_optimism_ok"] = rep.br_optimism_ok;
        doc["regret_le_bonus_ok"] = rep.regret_le_bonus_ok;
        doc["k_condition_met"] = rep.k_condition_met;
        doc["max_optimism_violation"] = rep.max_optimism_violation;
        doc["max_br_violation"] = rep.max_br_violation;
        doc["max_regret_excess"] = rep.max_regret_excess;
    }

    if (manifest) *manifest = std::move(doc);
    if (keep_output) *keep_output = std::move(out);
    return row;
}

json archive_to_json(const robust_markov_game& game, const run_archive& archive) {
    json doc;
    doc["beta"] = archive.beta;
    json models = json::array();
    for (int i = 0; i < game.n; ++i) {
        json per_h = json::array();
        for (int h = 0; h < game.H; ++h) {
            json per_k = json::array();
            for (const empirical_model& emp : archive.models[i][h])
                per_k.push_back({{"N", emp.N}, {"r_hat", emp.r_hat}, {"counts", emp.counts}});
            per_h.push_back(std::move(per_k));
        }
        models.push_back(std::move(per_h));
    }
    doc["models"] = models;
    doc["q"] = archive.q;
    return doc;
}

int run_learn(const learn_args& a) {
    const robust_markov_game game = read_game_file(a.game_path);
    if (!a.force && projected_samples(game, a.K, a.N) > 1e9)
        throw rmg_error(error_kind::resource_limit,
                        "projected N_all exceeds 1e9; pass --force to run anyway");

    std::filesystem::create_directories(a.out_dir);
    learner_output out;
    json manifest;
    run_row row = execute_learn_cell(game, a, "learn-K" + std::to_string(a.K) + "-N" +
                                                  std::to_string(a.N) + "-seed" +
                                                  std::to_string(a.seed),
                                     &out, &manifest);

    const std::filesystem::path dir(a.out_dir);
    write_mixture_file((dir / "mixture.json").string(), out.mixture);
    manifest["mixture_file"] = "mixture.json";
    if (out.archive) {
        write_text_file((dir / "archive.json").string(),
                        archive_to_json(game, *out.archive).dump() + "\n");
        manifest["archive_file"] = "archive.json";
    }
    write_text_file((dir / "manifest.json").string(), manifest.dump(1) + "\n");
    append_run_rows(a.out_dir, {format_run_row(row)});

    std::cout << "learn " << row.cell_id << ": N_all=" << row.n_all
              << " gap_recursive=" << row.gap_recursive << " gap_mc=" << row.gap_mc
              << " runtime_s=" << row.runtime_s << "\n"
              << "wrote " << (dir / "mixture.json").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct eval_args {
    std::string game_path;
    std::string mixture_path;
    std::string method = "recursive";
    int mc_samples = 1000;
    std::uint64_t seed = 1;
    std::string out_prefix = "gap_report";
};

int run_eval(const eval_args& a) {
    const robust_markov_game game = read_game_file(a.game_path);
    const policy_mixture mixture = read_mixture_file(a.mixture_path);
    validate_mixture(game, mixture);

    const bool want_recursive = a.method == "recursive" || a.method == "both";
    const bool want_mc = a.method == "mc" || a.method == "both";
    if (want_mc && a.mc_samples < 30)
        throw rmg_error(error_kind::invalid_config,
                        "--mc-samples must be >= 30 for the confidence interval");

    const std::string run_id = std::filesystem::path(a.mixture_path).stem().string();
    json doc;
    doc["run_id"] = run_id;
    doc["game"] = a.game_path;
    doc["mixture"] = a.mixture_path;
    std::string csv = gap_report_csv_header();

    auto emit = [&](const char* key, const gap_report& report) {
        doc[key] = json::parse(gap_report_json(report, run_id));
        csv += gap_report_csv_row(report, run_id);
        std::cout << key << ": overall_gap=" << csv_double(report.overall_gap)
                  << " se=" << csv_double(report.overall_se) << (report.exact ? " (exact)" : "")
                  << "\n";
    };
    if (want_recursive) emit("recursive", cce_gap(game, mixture, gap_method::recursive));
    if (want_mc)
        emit("mc", cce_gap(game, mixture, gap_method::monte_carlo, a.mc_samples, a.seed));

    write_text_file(a.out_prefix + ".json", doc.dump(1) + "\n");
    write_text_file(a.out_prefix + ".csv", csv);
    std::cout << "wrote " << a.out_prefix << ".json and " << a.out_prefix << ".csv\n";
    return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

template <typename T>
std::vector<T> grid_list(const json& grid, const char* key, std::vector<T> fallback) {
    if (!grid.contains(key)) return fallback;
    auto list = grid.at(key).get<std::vector<T>>();
    if (list.empty())
        throw rmg_error(error_kind::invalid_config,
                        std::string("sweep grid \"") + key + "\" must be nonempty");
    return list;
}

int run_sweep(const std::string& config_path, const std::string& out_override, bool force) {
    json config;
    try {
        config = json::parse(read_text_file(config_path));
    } catch (const json::parse_error& e) {
        throw rmg_error(error_kind::parse_error, std::string("sweep config: ") + e.what());
    }

    // Game source: file path or inline random-game spec. Files must exist at launch.
    robust_markov_game game;
    std::string game_label;
    if (config.contains("game")) {
        game_label = config.at("game").get<std::string>();
        game = read_game_file(game_label);
    } else if (config.contains("game_spec")) {
        const json& gs = config.at("game_spec");
        game_spec spec;
        if (gs.contains("n")) spec.n = gs.at("n").get<int>();
        if (gs.contains("H")) spec.H = gs.at("H").get<int>();
        if (gs.contains("S")) spec.S = gs.at("S").get<int>();
        if (gs.contains("actions")) spec.actions = gs.at("actions").get<std::vector<int>>();
        if (gs.contains("radii")) spec.radii = gs.at("radii").get<std::vector<double>>();
        if (gs.contains("seed")) spec.seed = gs.at("seed").get<std::uint64_t>();
        game = random_game(spec);
        game_label = "game_spec(seed=" + std::to_string(spec.seed) + ")";
    } else {
        throw rmg_error(error_kind::invalid_config,
                        "sweep config needs a \"game\" path or a \"game_spec\" object");
    }

    if (!config.contains("grid"))
        throw rmg_error(error_kind::invalid_config, "sweep config needs a \"grid\" object");
    const json& grid = config.at("grid");
    const auto Ks = grid_list<int>(grid, "K", {});
    const auto Ns = grid_list<int>(grid, "N", {});
    if (Ks.empty() || Ns.empty())
        throw rmg_error(error_kind::invalid_config, "sweep grid needs nonempty K and N lists");
    const auto c_alphas = grid_list<double>(grid, "c_alpha", {24.0});
    const auto c_bs = grid_list<double>(grid, "c_b", {1.0});
    const auto deltas = grid_list<double>(grid, "delta", {0.05});
    const auto seeds = grid_list<std::uint64_t>(config, "seeds", {});
    if (seeds.empty())
        throw rmg_error(error_kind::invalid_config, "sweep config needs a nonempty seeds list");

    const int mc_samples = config.value("mc_samples", 1000);
    const bool archive = config.value("archive", false);
    std::string out_dir = config.value("out", std::string("sweep_out"));
    if (!out_override.empty()) out_dir = out_override;
    std::filesystem::create_directories(out_dir);

    // Deterministic cell ids in cross-product order; completion order may differ.
    struct cell {
        std::string id;
        learn_args args;
    };
    std::vector<cell> cells;
    for (int K : Ks)
        for (int N : Ns)
            for (double c_alpha : c_alphas)
                for (double c_b : c_bs)
                    for (double delta : deltas)
                        for (std::uint64_t seed : seeds) {
                            learn_args a;
                            a.game_path = game_label;
                            a.K = K;
                            a.N = N;
                            a.c_alpha = c_alpha;
                            a.c_b = c_b;
                            a.delta = delta;
                            a.seed = seed;
                            a.archive = archive;
                            a.force = force;
                            a.mc_samples = mc_samples;
                            char id[64];
                            std::snprintf(id, sizeof id, "c%04zu-K%d-N%d-seed%llu",
                                          cells.size(), K, N,
                                          static_cast<unsigned long long>(seed));
                            cells.push_back({id, a});
                        }

    if (!force)
        for (const cell& c : cells)
            if (projected_samples(game, c.args.K, c.args.N) > 1e9)
                throw rmg_error(error_kind::resource_limit,
                                "cell " + c.id +
                                    " projects N_all > 1e9; pass --force to run anyway");

    // Work pool: cells are independent; rows are appended as cells complete.
    int failures = 0;
    const long long total = static_cast<long long>(cells.size());
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
    for (long long c = 0; c < total; ++c) {
        run_row row;
        try {
            row = execute_learn_cell(game, cells[c].args, cells[c].id, nullptr, nullptr);
        } catch (const rmg_error& e) {
            row = run_row{};
            row.cell_id = cells[c].id;
            row.K = cells[c].args.K;
            row.N = cells[c].args.N;
            row.seed = cells[c].args.seed;
            row.sigma_min = game.radii[0];
            for (double s : game.radii) row.sigma_min = std::min(row.sigma_min, s);
            row.status = std::string("error:") + to_string(e.kind());
        }
        const std::string formatted = format_run_row(row);
#pragma omp critical(rmglab_sweep_io)
        {
            if (row.status != "ok") ++failures;
            append_run_rows(out_dir, {formatted});
            std::cout << row.cell_id << " " << row.status << "\n";
        }
    }

    std::cout << "sweep complete: " << cells.size() << " cells, " << failures
              << " failed; results in " << (std::filesystem::path(out_dir) / "runs.csv").string()
              << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// oracle-check
// ---------------------------------------------------------------------------

int run_oracle_check(long long trials, int S, std::uint64_t seed) {
    if (trials < 1) throw rmg_error(error_kind::invalid_config, "--trials must be >= 1");
    if (S < 1) throw rmg_error(error_kind::invalid_config, "--S must be >= 1");

    double worst_value = 0.0;  // dual vs LP, and dual vs greedy-kernel route
    double worst_tv = 0.0;     // radius excess of the greedy worst kernel
    double worst_rowsum = 0.0; // simplex drift of the greedy worst kernel

    for (long long t = 0; t < trials; ++t) {
        rng_stream stream{seed, stream_tag::oracle, static_cast<std::uint64_t>(t)};

        prob_row p0(S);
        double total = 0.0;
        for (int s = 0; s < S; ++s) {
            p0[s] = -std::log(stream.next_double_open());
            total += p0[s];
        }
        for (int s = 0; s < S; ++s) p0[s] /= total;

        // Every fifth trial quantizes values to force massive ties.
        const bool tie_stress = t % 5 == 2;
        value_vector v(S);
        for (int s = 0; s < S; ++s) {
            double x = 3.0 * stream.next_double();
            v[s] = tie_stress ? std::floor(2.0 * x) / 2.0 : x;
        }

        double sigma;
        switch (t % 10) {
        case 0: sigma = 0.0; break;
        case 1: sigma = 1.0; break;
        default: sigma = stream.next_double(); break;
        }

        const double dual = tv_support_value(p0, v, sigma);
        const double lp = lp_inner_min_oracle(p0, v, sigma);
        worst_value = std::max(worst_value, std::abs(dual - lp));
        if (sigma == 0.0 && dual != lp)
            worst_value = std::max(worst_value, 1.0); // sigma = 0 must agree bitwise

        const inner_min_result result = tv_worst_case_kernel(p0, v, sigma);
        worst_value = std::max(worst_value, std::abs(result.value - dot(result.worst_kernel, v)));

        double l1 = 0.0, rowsum = 0.0;
        for (int s = 0; s < S; ++s) {
            l1 += std::abs(result.worst_kernel[s] - p0[s]);
            rowsum += result.worst_kernel[s];
        }
        worst_tv = std::max(worst_tv, 0.5 * l1 - sigma);
        worst_rowsum = std::max(worst_rowsum, std::abs(rowsum - 1.0));
    }

    std::cout << "oracle-check: " << trials << " trials, S=" << S << "\n"
              << "max absolute deviation " << csv_double(worst_value) << "\n"
              << "max TV-radius excess " << csv_double(std::max(worst_tv, 0.0)) << "\n"
              << "max kernel row-sum drift " << csv_double(worst_rowsum) << "\n";
    const bool ok = worst_value <= 1e-9 && worst_tv <= 1e-10 && worst_rowsum <= 1e-10;
    std::cout << (ok ? "OK" : "FAIL") << "\n";
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// gen-game
// ---------------------------------------------------------------------------

int run_gen_game(const game_spec& spec, const std::string& out_path) {
    const robust_markov_game game = random_game(spec);
    write_game_file(out_path, game);
    std::cout << "wrote " << out_path << " (n=" << game.n << " H=" << game.H << " S=" << game.S
              << " joint_actions=" << game.joint_actions() << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rmglab: robust Markov game learning and evaluation harness"};
    app.require_subcommand(1);

    learn_args learn;
    CLI::App* cmd_learn = app.add_subcommand("learn", "run Robust-Q-FTRL on a game file");
    cmd_learn->add_option("--game", learn.game_path, "game JSON file")->required();
    cmd_learn->add_option("--K", learn.K, "FTRL iterations per step");
    cmd_learn->add_option("--N", learn.N, "samples per (s,a_i) cell per iteration");
    cmd_learn->add_option("--c-alpha", learn.c_alpha, "learning-rate constant (>= 24)");
    cmd_learn->add_option("--c-b", learn.c_b, "bonus constant");
    cmd_learn->add_option("--delta", learn.delta, "confidence level in (0,1)");
    cmd_learn->add_option("--seed", learn.seed, "master seed");
    cmd_learn->add_option("--out", learn.out_dir, "output directory")->required();
    cmd_learn->add_flag("--archive", learn.archive, "retain and dump per-(i,h,k) history");
    cmd_learn->add_flag("--force", learn.force, "run even if projected N_all exceeds 1e9");
    cmd_learn->add_option("--mc-samples", learn.mc_samples,
                          "Monte-Carlo draws for the run record's gap_mc column");

    eval_args eval;
    CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate the CCE gap of a mixture file");
    cmd_eval->add_option("--game", eval.game_path, "game JSON file")->required();
    cmd_eval->add_option("--mixture", eval.mixture_path, "mixture JSON file")->required();
    cmd_eval->add_option("--method", eval.method, "gap method")
        ->check(CLI::IsMember({"recursive", "mc", "both"}));
    cmd_eval->add_option("--mc-samples", eval.mc_samples, "Monte-Carlo draws (>= 30)");
    cmd_eval->add_option("--seed", eval.seed, "Monte-Carlo seed");
    cmd_eval->add_option("--out", eval.out_prefix, "output prefix (PREFIX.json, PREFIX.csv)");

    std::string sweep_config, sweep_out;
    bool sweep_force = false;
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run a grid x seeds experiment sweep");
    cmd_sweep->add_option("config", sweep_config, "sweep config JSON file")->required();
    cmd_sweep->add_option("--out", sweep_out, "output directory (overrides config)");
    cmd_sweep->add_flag("--force", sweep_force, "run even if a cell projects N_all > 1e9");

    long long oracle_trials = 10000;
    int oracle_S = 8;
    std::uint64_t oracle_seed = 1;
    CLI::App* cmd_oracle =
        app.add_subcommand("oracle-check", "cross-check the dual against the LP oracle");
    cmd_oracle->add_option("--trials", oracle_trials, "random triples to test");
    cmd_oracle->add_option("--S", oracle_S, "support size of each triple");
    cmd_oracle->add_option("--seed", oracle_seed, "triple-generation seed");

    game_spec gen_spec;
    std::string gen_out = "game.json";
    std::vector<int> gen_actions;
    std::vector<double> gen_radii;
    CLI::App* cmd_gen = app.add_subcommand("gen-game", "generate a random game file");
    cmd_gen->add_option("--n", gen_spec.n, "agents");
    cmd_gen->add_option("--H", gen_spec.H, "horizon");
    cmd_gen->add_option("--S", gen_spec.S, "states");
    cmd_gen->add_option("--actions", gen_actions, "per-agent action counts")->delimiter(',');
    cmd_gen->add_option("--radii", gen_radii, "per-agent uncertainty radii")->delimiter(',');
    cmd_gen->add_option("--seed", gen_spec.seed, "generation seed");
    cmd_gen->add_option("--out", gen_out, "output game file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    try {
        if (cmd_learn->parsed()) return run_learn(learn);
        if (cmd_eval->parsed()) return run_eval(eval);
        if (cmd_sweep->parsed()) return run_sweep(sweep_config, sweep_out, sweep_force);
        if (cmd_oracle->parsed()) return run_oracle_check(oracle_trials, oracle_S, oracle_seed);
        if (cmd_gen->parsed()) {
            if (!gen_actions.empty()) gen_spec.actions = gen_actions;
            if (!gen_radii.empty()) gen_spec.radii = gen_radii;
            if (static_cast<int>(gen_spec.actions.size()) != gen_spec.n)
                gen_spec.actions.resize(gen_spec.n, gen_spec.actions.empty()
                                                        ? 2
                                                        : gen_spec.actions.back());
            if (static_cast<int>(gen_spec.radii.size()) != gen_spec.n)
                gen_spec.radii.resize(gen_spec.n,
                                      gen_spec.radii.empty() ? 0.3 : gen_spec.radii.back());
            return run_gen_game(gen_spec, gen_out);
        }
    } catch (const rmg_error& e) {
        std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
