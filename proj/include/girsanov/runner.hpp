#pragma once

#include "girsanov/config.hpp"
#include "girsanov/report.hpp"

namespace girsanov {

struct RunOptions {
    /// Worker threads for path loops; 0 reads GIRSANOV_LAB_WORKERS, falling
    /// back to the hardware count. Never affects report contents.
    int workers = 0;
};

int resolve_worker_count(int requested);

/// Executes the experiment named by cfg.kind and returns its report.
/// Deterministic: report rows are a pure function of (config, master_seed).
RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

}  // namespace girsanov
