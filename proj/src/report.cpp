#include "girsanov/report.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace girsanov {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

bool RunReport::all_pass() const {
    for (const auto& row : rows) {
        if (!row.pass) {
            return false;
        }
    }
    return true;
}

std::string render_csv(const RunReport& report) {
    std::string out = "metric,value,stderr,pass\n";
    for (const auto& row : report.rows) {
        out += row.name;
        out += ',';
        out += format_double(row.value);
        out += ',';
        out += format_double(row.stderr_);
        out += ',';
        out += row.pass ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string render_json(const RunReport& report) {
    nlohmann::ordered_json j;
    j["section"] = report.section;
    j["version"] = report.version;
    nlohmann::ordered_json echo = nlohmann::ordered_json::array();
    for (const auto& [key, value] : report.config_echo) {
        echo.push_back({{"key", key}, {"value", value}});
    }
    j["config"] = std::move(echo);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        rows.push_back({{"metric", row.name},
                        {"value", row.value},
                        {"stderr", row.stderr_},
                        {"pass", row.pass}});
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

std::filesystem::path write_report(const RunReport& report, ReportFormat format,
                                   const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const std::filesystem::path path =
        out_dir / (report.section + (format == ReportFormat::Csv ? ".csv" : ".json"));
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("write_report: cannot open " + path.string());
    }
    out << (format == ReportFormat::Csv ? render_csv(report) : render_json(report));
    if (!out) {
        throw std::runtime_error("write_report: write failed for " + path.string());
    }
    return path;
}

RunReport parse_json_report(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    RunReport report;
    report.section = j.at("section").get<std::string>();
    report.version = j.at("version").get<std::string>();
    for (const auto& entry : j.at("config")) {
        report.config_echo.emplace_back(entry.at("key").get<std::string>(),
                                        entry.at("value").get<std::string>());
    }
    for (const auto& entry : j.at("rows")) {
        MetricRow row;
        row.name = entry.at("metric").get<std::string>();
        row.value = entry.at("value").get<double>();
        row.stderr_ = entry.at("stderr").get<double>();
        row.pass = entry.at("pass").get<bool>();
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace girsanov
