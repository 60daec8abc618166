#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "girsanov/config.hpp"
#include "girsanov/errors.hpp"
#include "girsanov/model_registry.hpp"
#include "girsanov/report.hpp"
#include "girsanov/runner.hpp"
#include "girsanov/version.hpp"

namespace {

int run_command(const std::string& config_path, bool seed_set, std::uint64_t seed,
                const std::string& out_dir, const std::string& format) {
    std::vector<girsanov::ExperimentConfig> configs;
    try {
        configs = girsanov::parse_config_file(config_path);
    } catch (const girsanov::ConfigError& err) {
        std::fprintf(stderr, "config error: %s\n", err.what());
        return 2;
    }

    const girsanov::ReportFormat fmt =
        format == "json" ? girsanov::ReportFormat::Json : girsanov::ReportFormat::Csv;
    bool all_pass = true;
    for (auto& cfg : configs) {
        if (seed_set) {
            cfg.master_seed = seed;
            for (auto& [key, value] : cfg.echo) {
                if (key == "master_seed") {
                    value = std::to_string(seed);
                }
            }
        }
        try {
            const girsanov::RunReport report = girsanov::run_experiment(cfg);
            const std::string target = !out_dir.empty() ? out_dir
                                       : !cfg.output.empty() ? cfg.output
                                                             : std::string(".");
            const auto path = girsanov::write_report(report, fmt, target);
            std::printf("[%s] %s -> %s (%.2fs)\n", report.all_pass() ? "pass" : "FAIL",
                        cfg.section.c_str(), path.string().c_str(), report.wall_seconds);
            all_pass = all_pass && report.all_pass();
        } catch (const girsanov::ConfigError& err) {
            std::fprintf(stderr, "config error in [%s]: %s\n", cfg.section.c_str(), err.what());
            return 2;
        } catch (const std::exception& err) {
            std::fprintf(stderr, "error in [%s]: %s\n", cfg.section.c_str(), err.what());
            return 1;
        }
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic change-of-drift laboratory"};
    app.set_version_flag("--version", girsanov::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string format = "csv";
    std::uint64_t seed = 0;
    auto* run = app.add_subcommand("run", "Run the experiments in a config file");
    run->add_option("config", config_path, "INI-style config file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Override master_seed for every section");
    run->add_option("--out", out_dir, "Output directory (default: section output or cwd)");
    run->add_option("--format", format, "Report format")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* list = app.add_subcommand("list-models", "Print the model registry");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& line : girsanov::model_catalog()) {
            std::printf("%s\n", line.c_str());
        }
        return 0;
    }
    return run_command(config_path, seed_opt->count() > 0, seed, out_dir, format);
}
