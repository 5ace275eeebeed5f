#include "jumpflow/cli/commands.hpp"
#include "jumpflow/cli/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace jumpflow;
using namespace jumpflow::cli;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / (std::string("jumpflow_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    std::string write(const std::string& name, const std::string& text) const {
        const auto file = path_ / name;
        std::ofstream(file) << text;
        return file.string();
    }

private:
    fs::path path_;
};

std::string slurp(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

const std::string kClosedForm = R"(schema_version = 1
scenario = closed_form_drift
horizon = 2

[plan]
paths = 100
schedule = 1, 4, 64
n_steps = 2000
)";

}  // namespace

TEST(Config, ParsesSectionsAndLists) {
    const auto c = parse_config(R"(# comment
schema_version = 1
scenario = levy_barrier
horizon = 2.5

[params]
a0 = 0.5   # trailing comment
marks = uniform:0:1

[plan]
seed = 7
paths = 30
schedule = 2, 8
eps = 0.1, 0.2
n_steps = 64
refine_hits = false

[output]
dir = somewhere
formats = json
paths_csv = true

[validation]
mode = warn
)");
    EXPECT_EQ(c.scenario, "levy_barrier");
    EXPECT_EQ(c.horizon, 2.5);
    EXPECT_EQ(c.params.at("a0"), "0.5");
    EXPECT_EQ(c.params.at("marks"), "uniform:0:1");
    EXPECT_EQ(c.seed, 7u);
    EXPECT_EQ(c.paths, 30u);
    EXPECT_EQ(c.schedule, (std::vector<int>{2, 8}));
    EXPECT_EQ(c.epsilons, (std::vector<double>{0.1, 0.2}));
    EXPECT_EQ(c.n_steps, 64u);
    EXPECT_FALSE(c.refine_hits);
    EXPECT_EQ(c.out_dir, "somewhere");
    EXPECT_TRUE(c.write_json);
    EXPECT_FALSE(c.write_csv);
    EXPECT_TRUE(c.write_paths);
    EXPECT_EQ(c.validation, ValidationMode::warn);

    const auto plan = c.plan();
    EXPECT_EQ(plan.grid.n_steps(), 64u);
    EXPECT_EQ(plan.grid.horizon(), 2.5);
}

TEST(Config, MissingHorizonNamesTheKey) {
    try {
        parse_config("schema_version = 1\nscenario = closed_form_drift\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("horizon"), std::string::npos);
        EXPECT_EQ(e.key(), "horizon");
    }
}

TEST(Config, UnknownKeyIsAnErrorInStrictModeOnly) {
    const std::string text = "schema_version = 1\nscenario = closed_form_drift\nhorizon = 1\n[plan]\nbogus = 3\n";
    try {
        parse_config(text);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 5u);
        EXPECT_EQ(e.key(), "bogus");
    }
    const auto warned = parse_config(text, ValidationMode::warn);
    ASSERT_EQ(warned.warnings.size(), 1u);
    EXPECT_NE(warned.warnings[0].find("bogus"), std::string::npos);
}

TEST(Config, UnknownTemplateParameterIsRejected) {
    EXPECT_THROW(parse_config("schema_version = 1\nscenario = closed_form_drift\nhorizon = 1\n[params]\nb0 = 1\n"),
                 ConfigError);
}

TEST(Config, BadValuesAreRejected) {
    const std::string head = "schema_version = 1\nscenario = closed_form_drift\n";
    EXPECT_THROW(parse_config(head + "horizon = soon\n"), ConfigError);
    EXPECT_THROW(parse_config(head + "horizon = -1\n"), ConfigError);
    EXPECT_THROW(parse_config(head + "horizon = 1\n[plan]\npaths = 0\n"), ConfigError);
    EXPECT_THROW(parse_config(head + "horizon = 1\n[plan]\nschedule = 1, x\n"), ConfigError);
    EXPECT_THROW(parse_config(head + "horizon = 1\n[validation]\nmode = lenient\n"), ConfigError);
    EXPECT_THROW(parse_config(head + "horizon = 1\nhorizon = 2\n"), ConfigError);
    EXPECT_THROW(parse_config("schema_version = 2\nscenario = closed_form_drift\nhorizon = 1\n"), ConfigError);
    EXPECT_THROW(parse_config("schema_version = 1\nscenario = nope\nhorizon = 1\n"), ConfigError);
    EXPECT_THROW(parse_config(head + "this line has no equals sign\n"), ConfigError);
}

TEST(Config, ModeOverrideWins) {
    const auto c = parse_config("schema_version = 1\nscenario = closed_form_drift\nhorizon = 1\n[validation]\nmode = warn\n",
                                ValidationMode::skip);
    EXPECT_EQ(c.validation, ValidationMode::skip);
}

TEST(Cli, ValidateIntervalExitDefaultsPasses) {
    TempDir dir;
    const auto conf = dir.write("c.conf", "schema_version = 1\nscenario = interval_exit\nhorizon = 10\n");
    const auto r = run({"validate", "--config", conf});
    EXPECT_EQ(r.code, exit_ok) << r.out << r.err;
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("PASS G3"), std::string::npos) << r.out;
}

TEST(Cli, DegenerateDiffusionIsAValidationFailure) {
    TempDir dir;
    const auto conf =
        dir.write("c.conf", "schema_version = 1\nscenario = levy_barrier\nhorizon = 1\n[params]\nb0 = 0\nb_rate = 0\n");
    for (const std::string sub : {"validate", "converge"}) {
        const auto r = run({sub, "--config", conf, "--out", (dir.path() / "out").string()});
        EXPECT_EQ(r.code, exit_validation_failure) << sub;
        EXPECT_NE(r.err.find("G3"), std::string::npos) << sub << ": " << r.err;
    }
}

TEST(Cli, ShortScheduleIsAUsageError) {
    TempDir dir;
    const auto conf = dir.write("c.conf", kClosedForm);
    const auto r = run({"converge", "--config", conf, "--schedule", "4", "--out", (dir.path() / "out").string()});
    EXPECT_EQ(r.code, exit_config_error);
    EXPECT_NE(r.err.find("schedule"), std::string::npos);
}

TEST(Cli, UsageErrorsExitWithThree) {
    TempDir dir;
    EXPECT_EQ(run({}).code, exit_config_error);
    EXPECT_EQ(run({"converge"}).code, exit_config_error);
    EXPECT_EQ(run({"converge", "--config", (dir.path() / "missing.conf").string()}).code, exit_config_error);
    const auto conf = dir.write("c.conf", kClosedForm);
    EXPECT_EQ(run({"converge", "--config", conf, "--strict", "--warn"}).code, exit_config_error);
    EXPECT_EQ(run({"--help"}).code, exit_ok);
}

TEST(Cli, ConvergeOnClosedFormReportsDecreasing) {
    TempDir dir;
    const auto conf = dir.write("c.conf", kClosedForm);
    const auto out = dir.path() / "out";
    const auto r = run({"converge", "--config", conf, "--out", out.string()});
    ASSERT_EQ(r.code, exit_ok) << r.out << r.err;
    EXPECT_NE(r.out.find("solution convergence: decreasing (verified)"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("hit-time convergence: decreasing (verified)"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("wall time:"), std::string::npos);
    EXPECT_TRUE(fs::exists(out / "report.json"));
    EXPECT_TRUE(fs::exists(out / "summary.csv"));
    EXPECT_FALSE(fs::exists(out / "paths.csv"));
    const auto json = slurp(out / "report.json");
    EXPECT_NE(json.find("\"schema_version\": 1"), std::string::npos);
    EXPECT_NE(json.find("closed_form_drift"), std::string::npos);
}

TEST(Cli, ReportIsByteIdenticalAcrossReruns) {
    TempDir dir;
    const auto conf = dir.write("c.conf",
                                "schema_version = 1\nscenario = levy_barrier\nhorizon = 1\n[plan]\npaths = 60\n"
                                "n_steps = 200\nschedule = 1, 4\n[output]\npaths_csv = true\n");
    const auto a = dir.path() / "a";
    const auto b = dir.path() / "b";
    ASSERT_NE(run({"converge", "--config", conf, "--out", a.string(), "--workers", "1"}).code, exit_config_error);
    ASSERT_NE(run({"converge", "--config", conf, "--out", b.string(), "--workers", "4"}).code, exit_config_error);
    EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
    EXPECT_EQ(slurp(a / "summary.csv"), slurp(b / "summary.csv"));
    EXPECT_EQ(slurp(a / "paths.csv"), slurp(b / "paths.csv"));
    EXPECT_FALSE(slurp(a / "report.json").empty());
}

TEST(Cli, SeedFlagChangesTheReport) {
    TempDir dir;
    const auto conf = dir.write("c.conf",
                                "schema_version = 1\nscenario = levy_barrier\nhorizon = 1\n[plan]\npaths = 20\n"
                                "n_steps = 100\nschedule = 1, 4\n");
    const auto a = dir.path() / "a";
    const auto b = dir.path() / "b";
    run({"converge", "--config", conf, "--out", a.string(), "--seed", "1"});
    run({"converge", "--config", conf, "--out", b.string(), "--seed", "2"});
    EXPECT_NE(slurp(a / "report.json"), slurp(b / "report.json"));
}

TEST(Cli, SimulateWritesSharedNoiseColumns) {
    TempDir dir;
    const auto conf = dir.write("c.conf", "schema_version = 1\nscenario = closed_form_drift\nhorizon = 1\n"
                                          "[plan]\nschedule = 1, 4\nn_steps = 8\n");
    const auto r = run({"simulate", "--config", conf, "--out", dir.path().string(), "--path-id", "3"});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    std::ifstream in(dir.path() / "trajectory_3.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "time,is_jump,x1_n0,x1_n1,x1_n4");
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
        ASSERT_EQ(v.size(), 5u);
        const double t = v[0];
        EXPECT_EQ(v[1], 0.0);
        EXPECT_NEAR(v[2], t, 1e-12);
        EXPECT_NEAR(v[3], 2.0 * t, 1e-12);
        EXPECT_NEAR(v[4], 1.25 * t, 1e-12);
        ++rows;
    }
    EXPECT_EQ(rows, 9);
}

TEST(Cli, SimulateIdenticalMembersGiveEqualColumns) {
    TempDir dir;
    const auto conf = dir.write("c.conf", "schema_version = 1\nscenario = levy_barrier\nhorizon = 1\n[params]\n"
                                          "a0 = 0\na_rate = 0\nb0 = 1\nb_rate = 0\nc_rate = 0\njump_rate = 3\nx0 = 0.25\n"
                                          "[plan]\nschedule = 1, 2\nn_steps = 16\n[validation]\nmode = skip\n");
    const auto r = run({"simulate", "--config", conf, "--out", dir.path().string()});
    ASSERT_EQ(r.code, exit_ok) << r.err;
    std::ifstream in(dir.path() / "trajectory_0.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
        ASSERT_EQ(v.size(), 5u);
        // Identical coefficients for every index: the columns coincide.
        EXPECT_EQ(v[2], v[3]);
        EXPECT_EQ(v[2], v[4]);
    }
}
