#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace girsanov {

struct MetricRow {
    std::string name;
    double value = 0.0;
    double stderr_ = 0.0;
    bool pass = true;
};

struct RunReport {
    std::string section;
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<MetricRow> rows;
    std::string version;
    double wall_seconds = 0.0;  // console only; never serialized, so report
                                // bytes stay a pure function of config+seed

    bool all_pass() const;
};

enum class ReportFormat { Csv, Json };

/// CSV: header `metric,value,stderr,pass`, one row per metric, LF newlines,
/// 17 significant digits.
std::string render_csv(const RunReport& report);

/// JSON mirror of the same rows plus the config echo and code version.
std::string render_json(const RunReport& report);

/// Writes <out_dir>/<section>.<ext> and returns the path.
std::filesystem::path write_report(const RunReport& report, ReportFormat format,
                                   const std::filesystem::path& out_dir);

/// Inverse of render_json (used to round-trip reports).
RunReport parse_json_report(const std::string& text);

}  // namespace girsanov
