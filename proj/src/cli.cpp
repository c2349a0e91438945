#include "tdrl/cli.hpp"

#include "tdrl/checkpoint.hpp"
#include "tdrl/config.hpp"
#include "tdrl/error.hpp"
#include "tdrl/train.hpp"
#include "tdrl/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace tdrl {

namespace {

std::filesystem::path default_out_root() {
    if (const char* env = std::getenv("TDRL_OUT")) return env;
    return "runs";
}

std::filesystem::path pick_run_dir(const std::filesystem::path& root, const RunConfig& config) {
    return root / (config.env_name + "_" + config.strategy + "_seed" +
                   std::to_string(config.seed));
}

int run_train(const std::string& config_path, std::optional<std::uint64_t> seed,
              std::optional<std::string> out) {
    RunConfig config = load_config(config_path);
    if (seed) config.seed = *seed;
    const std::filesystem::path run_dir =
        out ? std::filesystem::path(*out) : pick_run_dir(default_out_root(), config);
    Trainer trainer(config, run_dir);
    const EvalReport report = trainer.run();
    std::cout << "run directory: " << run_dir.string() << '\n';
    std::cout << "episodes passing all pass-fail tests: " << report.all_pass_episodes << "/"
              << report.episodes << " (" << report.all_pass_fraction << ")\n";
    for (std::size_t i = 0; i < report.passfail_names.size(); ++i) {
        std::cout << "  " << report.passfail_names[i] << ": " << report.passfail_rates[i] << '\n';
    }
    for (std::size_t i = 0; i < report.indicative_names.size(); ++i) {
        std::cout << "  " << report.indicative_names[i] << ": " << report.indicative_means[i]
                  << '\n';
    }
    return 0;
}

int run_verify(int instances, std::uint64_t seed, std::optional<std::string> out) {
    const TheoryVerdict verdict = verify_theory(instances, seed);
    std::cout << "theory verification over " << verdict.instances << " instances\n";
    std::cout << "  exact reweighting (max TV " << verdict.max_eq4_total_variation
              << "): " << (verdict.eq4_pass ? "pass" : "fail") << '\n';
    std::cout << "  likelihood-ratio monotonicity: " << (verdict.lemma1_pass ? "pass" : "fail")
              << '\n';
    std::cout << "  policy-distance contraction (p=1,2): "
              << (verdict.theorem1_pass ? "pass" : "fail") << '\n';
    std::cout << "  optimal-set intersection identity: "
              << (verdict.intersection_pass ? "pass" : "fail") << '\n';
    std::cout << "  first instance d1=" << verdict.first_d1 << " d2=" << verdict.first_d2 << '\n';

    const std::filesystem::path out_dir = out ? std::filesystem::path(*out)
                                              : default_out_root() / "verify-theory";
    std::filesystem::create_directories(out_dir / "verdicts");
    const auto verdict_path = out_dir / "verdicts" / "verdict.json";
    std::ofstream file(verdict_path);
    if (!file) throw Error("verify-theory: cannot write " + verdict_path.string());
    file << verdict.to_json().dump(2) << '\n';
    std::cout << "verdict written to " << verdict_path.string() << '\n';
    const bool all = verdict.lemma1_pass && verdict.theorem1_pass && verdict.eq4_pass &&
                     verdict.intersection_pass;
    return all ? 0 : 1;
}

int run_compare(const std::string& config_path, std::size_t episodes,
                const std::optional<std::string>& run, std::optional<std::uint64_t> seed) {
    RunConfig config = load_config(config_path);
    if (seed) config.seed = *seed;
    const std::filesystem::path run_dir =
        run ? std::filesystem::path(*run) : pick_run_dir(default_out_root(), config);
    const std::filesystem::path checkpoint_dir = run_dir / "checkpoints" / "final";
    if (!std::filesystem::exists(checkpoint_dir)) {
        throw Error("compare: checkpoint not found at " + checkpoint_dir.string());
    }
    Trainer trainer(config, run_dir / "compare_scratch");
    trainer.restore_checkpoint(checkpoint_dir);
    const EvalReport report = trainer.evaluate(episodes);
    std::cout << "rollouts: " << report.episodes << '\n';
    std::cout << "all pass-fail tests passed: " << report.all_pass_episodes << " ("
              << report.all_pass_fraction << ")\n";
    for (std::size_t i = 0; i < report.passfail_names.size(); ++i) {
        std::cout << report.passfail_names[i] << " pass rate: " << report.passfail_rates[i]
                  << '\n';
    }
    for (std::size_t i = 0; i < report.indicative_names.size(); ++i) {
        std::cout << report.indicative_names[i] << " mean: " << report.indicative_means[i] << '\n';
    }
    std::filesystem::remove_all(run_dir / "compare_scratch");
    return 0;
}

int run_export(const std::string& run, const std::string& format) {
    if (format != "csv") throw Error("export: unsupported format '" + format + "'");
    const std::filesystem::path run_dir(run);
    const std::filesystem::path metrics = run_dir / "metrics.csv";
    std::ifstream in(metrics);
    if (!in) throw Error("export: cannot open " + metrics.string());

    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t columns = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (columns == 0) {
            columns = cells.size();
        } else if (cells.size() != columns) {
            throw Error("export: ragged csv row in " + metrics.string());
        }
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) throw Error("export: no data in " + metrics.string());

    std::filesystem::create_directories(run_dir / "export");
    const auto out_path = run_dir / "export" / "curves.csv";
    std::ofstream out(out_path);
    if (!out) throw Error("export: cannot write " + out_path.string());
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    std::cout << "exported " << rows.size() - 1 << " rows to " << out_path.string() << '\n';
    return 0;
}

} // namespace

int cli(int argc, const char* const* argv) {
    CLI::App app{"test-driven reinforcement learning toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;

    auto* train_cmd = app.add_subcommand("train", "train a policy from a run config");
    train_cmd->add_option("--config", config_path, "path to the JSON run config")->required();
    std::uint64_t seed_value = 0;
    auto* train_seed = train_cmd->add_option("--seed", seed_value, "override the config seed");
    std::string out_value;
    auto* train_out = train_cmd->add_option("--out", out_value, "run output directory");

    auto* verify_cmd =
        app.add_subcommand("verify-theory", "run the exact-enumeration theory checks");
    int instances = 100;
    std::uint64_t verify_seed = 0;
    verify_cmd->add_option("--instances", instances, "number of randomized instances");
    verify_cmd->add_option("--seed", verify_seed, "verification seed");
    std::string verify_out;
    auto* verify_out_opt = verify_cmd->add_option("--out", verify_out, "output directory");

    auto* compare_cmd =
        app.add_subcommand("compare", "roll out a checkpointed policy and print test results");
    std::string compare_config, compare_run;
    std::size_t compare_episodes = 50;
    compare_cmd->add_option("--config", compare_config, "path to the JSON run config")->required();
    compare_cmd->add_option("--episodes", compare_episodes, "number of rollouts")->required();
    auto* compare_run_opt = compare_cmd->add_option(
        "--run", compare_run, "run directory (default: where train would write this config)");
    std::uint64_t compare_seed = 0;
    auto* compare_seed_opt =
        compare_cmd->add_option("--seed", compare_seed, "override the config seed");

    auto* export_cmd = app.add_subcommand("export", "export training curves from a run");
    std::string export_run, export_format = "csv";
    export_cmd->add_option("--run", export_run, "run directory")->required();
    export_cmd->add_option("--format", export_format, "output format (csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (train_cmd->parsed()) {
            if (*train_seed) seed = seed_value;
            if (*train_out) out = out_value;
            return run_train(config_path, seed, out);
        }
        if (verify_cmd->parsed()) {
            std::optional<std::string> verify_out_path;
            if (*verify_out_opt) verify_out_path = verify_out;
            return run_verify(instances, verify_seed, verify_out_path);
        }
        if (compare_cmd->parsed()) {
            std::optional<std::uint64_t> compare_seed_opt_value;
            if (*compare_seed_opt) compare_seed_opt_value = compare_seed;
            std::optional<std::string> compare_run_value;
            if (*compare_run_opt) compare_run_value = compare_run;
            return run_compare(compare_config, compare_episodes, compare_run_value,
                               compare_seed_opt_value);
        }
        if (export_cmd->parsed()) {
            return run_export(export_run, export_format);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace tdrl
