#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "girsanov/model_registry.hpp"

namespace girsanov {

/// One [section] of a config file: flat key = value lines, no nesting.
/// Recognized keys: kind, model, t0, T, n_steps, paths, master_seed,
/// levels (comma-separated), output. Everything else is passed to the
/// model factory as a parameter.
struct ExperimentConfig {
    std::string section;
    std::string kind;
    std::string model;
    double t0 = 0.0;
    double horizon = 1.0;
    std::size_t n_steps = 64;
    std::size_t paths = 1000;
    std::uint64_t master_seed = 0;
    std::vector<double> levels;
    std::string output;
    ParamMap params;

    /// Raw key/value pairs in file order, echoed into every report.
    std::vector<std::pair<std::string, std::string>> echo;
};

std::vector<ExperimentConfig> parse_config_text(const std::string& text,
                                                const std::string& origin);
std::vector<ExperimentConfig> parse_config_file(const std::string& path);

}  // namespace girsanov
