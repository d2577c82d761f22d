#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "sage/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string run_dir = "runs/default";
    std::string ablation_override;
};

sage::RunConfig load(const CommonArgs& args) {
    sage::RunConfig cfg = sage::load_config(args.config_path);
    if (!args.ablation_override.empty())
        cfg.ablation = sage::ablation_from_name(args.ablation_override);
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool with_run_dir = true) {
    cmd->add_option("--config", args.config_path, "Path to the run configuration")->required();
    if (with_run_dir) cmd->add_option("--run-dir", args.run_dir, "Run directory for artifacts");
    cmd->add_option("--ablation-override", args.ablation_override,
                    "Override the configured ablation (full, no_icp, no_agent_infra)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-grounded user simulation and agent evaluation"};
    app.require_subcommand(1);

    CommonArgs args;
    std::size_t n = 10;
    int runs = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;

    auto* validate = app.add_subcommand("validate", "Check a configuration file");
    add_common(validate, args, false);

    auto* generate = app.add_subcommand("generate", "Build scenarios and roll out interactions");
    add_common(generate, args);
    generate->add_option("--n", n, "Number of scenarios");
    generate->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { seed = v; seed_set = true; }, "Override the base seed");
    generate->add_option("--workers", workers, "Override the worker count");

    auto* evaluate = app.add_subcommand("evaluate", "Score agent turns against the rubrics");
    add_common(evaluate, args);
    evaluate->add_option("--workers", workers, "Override the worker count");

    auto* mine = app.add_subcommand("mine", "Mine deduplicated bugs from flagged turns");
    add_common(mine, args);
    mine->add_option("--runs", runs, "Override the number of mining repetitions");

    auto* diversity = app.add_subcommand("diversity", "Lexical diversity of simulated user turns");
    add_common(diversity, args);

    auto* report = app.add_subcommand("report", "Collate mining and diversity results");
    add_common(report, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            auto raw = sage::read_file(args.config_path);
            auto diags = sage::validate_config_json(
                sage::json::parse(raw), std::filesystem::path(args.config_path).parent_path());
            if (diags.empty()) {
                std::printf("%s: ok\n", args.config_path.c_str());
                return 0;
            }
            for (const auto& d : diags) std::fprintf(stderr, "%s: %s\n", args.config_path.c_str(), d.c_str());
            return 1;
        }

        sage::RunConfig cfg = load(args);
        if (seed_set) cfg.seed = seed;
        if (workers > 0) cfg.workers = workers;
        if (runs > 0) cfg.mining.runs = runs;
        sage::RunPaths paths{args.run_dir};

        if (generate->parsed()) sage::stage_generate(cfg, paths, n);
        else if (evaluate->parsed()) sage::stage_evaluate(cfg, paths);
        else if (mine->parsed()) sage::stage_mine(cfg, paths);
        else if (diversity->parsed()) sage::stage_diversity(cfg, paths);
        else if (report->parsed()) sage::stage_report(cfg, paths);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
