#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "girsanov/config.hpp"
#include "girsanov/errors.hpp"
#include "girsanov/report.hpp"
#include "girsanov/runner.hpp"
#include "girsanov/version.hpp"

using namespace girsanov;

namespace {

const char* kSampleConfig = R"(# two experiments
[mart_small]
kind = weights
model = brownian_shift
theta = 0.5
t0 = 0
T = 1
n_steps = 32
paths = 500
master_seed = 42
levels = 1, 2

[pinv]
kind = pseudoinverse
count = 50
size = 6
master_seed = 7
)";

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("config parsing") {
    const auto configs = parse_config_text(kSampleConfig, "inline");
    REQUIRE(configs.size() == 2);
    CHECK(configs[0].section == "mart_small");
    CHECK(configs[0].kind == "weights");
    CHECK(configs[0].model == "brownian_shift");
    CHECK(configs[0].n_steps == 32);
    CHECK(configs[0].paths == 500);
    CHECK(configs[0].master_seed == 42);
    REQUIRE(configs[0].levels.size() == 2);
    CHECK(configs[0].levels[1] == 2.0);
    CHECK(configs[0].params.at("theta") == "0.5");
    CHECK(configs[1].kind == "pseudoinverse");

    CHECK_THROWS_AS(parse_config_text("key = 1\n", "inline"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[s]\nkind = weights\nmodel = m\nT = -1\n", "inline"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text("[s]\nkind = nope\nmodel = m\n", "inline"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[s]\nkind = weights\n", "inline"), ConfigError);
    CHECK_THROWS_AS(
        parse_config_text("[s]\nkind = weights\nmodel = m\nlevels = 2, 1\n", "inline"),
        ConfigError);
    CHECK_THROWS_AS(parse_config_text("", "inline"), ConfigError);
}

TEST_CASE("unknown model fails with the offending key") {
    auto configs =
        parse_config_text("[s]\nkind = weights\nmodel = mystery\npaths = 10\n", "inline");
    try {
        run_experiment(configs[0], {1});
        FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
        CHECK(err.key() == "model");
    }
}

TEST_CASE("report rendering") {
    RunReport report;
    report.section = "demo";
    report.version = kVersion;
    report.config_echo = {{"kind", "weights"}, {"model", "brownian_shift"}};

    SUBCASE("empty metric list gives a header-only CSV") {
        CHECK(render_csv(report) == "metric,value,stderr,pass\n");
    }

    SUBCASE("one row gives a two-line CSV with 17 significant digits") {
        report.rows.push_back({"third", 1.0 / 3.0, 0.0, true});
        const std::string csv = render_csv(report);
        CHECK(csv == "metric,value,stderr,pass\nthird,0.33333333333333331,0,1\n");
    }

    SUBCASE("JSON round-trips to an equal report") {
        report.rows.push_back({"alpha", 0.1234567890123456789, 0.25, true});
        report.rows.push_back({"beta", -7.0, 0.0, false});
        const RunReport back = parse_json_report(render_json(report));
        CHECK(back.section == report.section);
        CHECK(back.version == report.version);
        CHECK(back.config_echo == report.config_echo);
        REQUIRE(back.rows.size() == report.rows.size());
        for (std::size_t i = 0; i < report.rows.size(); ++i) {
            CHECK(back.rows[i].name == report.rows[i].name);
            CHECK(back.rows[i].value == report.rows[i].value);
            CHECK(back.rows[i].stderr_ == report.rows[i].stderr_);
            CHECK(back.rows[i].pass == report.rows[i].pass);
        }
    }
}

TEST_CASE("run_experiment is deterministic across reruns and worker counts") {
    const auto configs = parse_config_text(kSampleConfig, "inline");
    for (const auto& cfg : configs) {
        const RunReport first = run_experiment(cfg, {1});
        const RunReport again = run_experiment(cfg, {1});
        const RunReport wide = run_experiment(cfg, {4});
        CHECK(render_csv(first) == render_csv(again));
        CHECK(render_csv(first) == render_csv(wide));
        CHECK(render_json(first) == render_json(wide));
    }
}

TEST_CASE("write_report emits byte-stable files") {
    const auto configs = parse_config_text(kSampleConfig, "inline");
    const RunReport report = run_experiment(configs[1], {2});
    const auto dir =
        std::filesystem::temp_directory_path() / "girsanov_report_test";
    std::filesystem::remove_all(dir);
    const auto csv_path = write_report(report, ReportFormat::Csv, dir);
    const auto json_path = write_report(report, ReportFormat::Json, dir);
    CHECK(csv_path.filename() == "pinv.csv");
    CHECK(slurp(csv_path) == render_csv(report));
    CHECK(slurp(json_path) == render_json(report));

    const RunReport rerun = run_experiment(configs[1], {4});
    const auto dir2 =
        std::filesystem::temp_directory_path() / "girsanov_report_test2";
    std::filesystem::remove_all(dir2);
    const auto csv_path2 = write_report(rerun, ReportFormat::Csv, dir2);
    CHECK(slurp(csv_path) == slurp(csv_path2));
    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(dir2);
}

TEST_CASE("the config echo reproduces the report") {
    const auto configs = parse_config_text(kSampleConfig, "inline");
    const RunReport report = run_experiment(configs[0], {2});

    std::string rebuilt = "[" + report.section + "]\n";
    for (const auto& [key, value] : report.config_echo) {
        rebuilt += key + " = " + value + "\n";
    }
    const auto reparsed = parse_config_text(rebuilt, "echo");
    REQUIRE(reparsed.size() == 1);
    const RunReport again = run_experiment(reparsed[0], {2});
    CHECK(render_csv(report) == render_csv(again));
}

TEST_CASE("weights experiment reports the martingale row") {
    const auto configs = parse_config_text(kSampleConfig, "inline");
    const RunReport report = run_experiment(configs[0], {2});
    bool has_mean = false, has_level = false, has_fraction = false;
    for (const auto& row : report.rows) {
        has_mean = has_mean || row.name == "mean_weight";
        has_level = has_level || row.name == "mean_weight_n1";
        has_fraction = has_fraction || row.name == "truncated_fraction_n2";
    }
    CHECK(has_mean);
    CHECK(has_level);
    CHECK(has_fraction);
}
