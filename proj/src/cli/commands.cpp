#include "jumpflow/cli/commands.hpp"

#include "jumpflow/hitting.hpp"
#include "jumpflow/report.hpp"
#include "jumpflow/solver.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace jumpflow::cli {

namespace {

// Validation draws live far away from simulation path ids.
constexpr std::uint64_t kValidationPathBase = 0xFFFF'FFFF'0000'0000ULL;

RngStream validation_stream(std::uint64_t seed, std::uint64_t slot) {
    return make_stream(seed, kValidationPathBase + slot, StreamRole::jump_marks);
}

ValidationReport shrinking_series(const std::string& name, const std::vector<int>& schedule,
                                  const std::vector<double>& gaps, const std::string& what) {
    ValidationReport report;
    report.assumption = name;
    report.samples = gaps.size();
    constexpr double tiny = 1e-12;
    bool ok = !gaps.empty();
    for (std::size_t i = 0; i < gaps.size(); ++i) {
        ok &= std::isfinite(gaps[i]);
        if (i > 0) ok &= gaps[i] <= gaps[i - 1] * (1.0 + 1e-9) + tiny;
    }
    if (!gaps.empty()) {
        report.estimate = gaps.back();
        ok &= gaps.back() <= tiny || gaps.back() < gaps.front();
    }
    report.pass = ok;
    std::ostringstream os;
    os << what << " along schedule";
    for (std::size_t i = 0; i < gaps.size(); ++i) os << " n=" << schedule[i] << ':' << gaps[i];
    report.detail = os.str();
    return report;
}

std::string format_report(const ValidationReport& r) {
    std::ostringstream os;
    os << (r.pass ? "PASS " : "FAIL ") << r.assumption << " estimate=" << std::setprecision(6) << r.estimate
       << " samples=" << r.samples;
    if (!r.pass && r.witness) {
        os << " witness t=" << r.witness->t << " x=[";
        for (Eigen::Index i = 0; i < r.witness->x.size(); ++i) os << (i ? "," : "") << r.witness->x(i);
        os << ']';
    }
    if (!r.detail.empty()) os << " (" << r.detail << ')';
    return os.str();
}

ParamMap full_params(const RunConfig& config) {
    ParamMap merged;
    for (const auto& spec : find_template(config.scenario).params) merged[spec.name] = spec.default_value;
    for (const auto& [k, v] : config.params) merged[k] = v;
    return merged;
}

struct BuildOutcome {
    std::optional<BuiltScenario> built;
    int status = exit_ok;
};

BuildOutcome build(const RunConfig& config, std::ostream& err) {
    try {
        return {find_template(config.scenario).build(config.params, config.horizon, config.schedule), exit_ok};
    } catch (const ScenarioError& ex) {
        err << "validation failed: " << ex.what() << '\n';
        return {std::nullopt, exit_validation_failure};
    } catch (const std::invalid_argument& ex) {
        err << "configuration error: " << ex.what() << '\n';
        return {std::nullopt, exit_config_error};
    }
}

void print_warnings(const RunConfig& config, std::ostream& err) {
    for (const auto& w : config.warnings) err << "warning: " << w << '\n';
}

std::string verdict_line(const std::string& label, const StatisticVerdict& v) {
    return label + ": " + std::string(to_string(v.trend)) + (v.verified ? " (verified)" : " (not verified)");
}

std::size_t env_workers() {
    if (const char* env = std::getenv("JUMPFLOW_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return 1;
}

}  // namespace

std::vector<ValidationReport> run_validators(const BuiltScenario& built, const std::vector<int>& schedule,
                                             std::uint64_t seed) {
    const ScenarioSequence& seq = built.sequence;
    const CoefficientSet limit = seq.limit();
    std::vector<ValidationReport> reports;

    reports.push_back(check_linear_growth(limit, seq.jumps, built.box, validation_stream(seed, 1)));
    reports.push_back(check_local_lipschitz(limit, seq.jumps, built.box, validation_stream(seed, 2)));
    if (built.envelope && seq.jumps.sampled_mass() > 0.0) {
        reports.push_back(check_small_jump_envelope(limit, seq.jumps, built.envelope->first,
                                                    built.envelope->second, built.box,
                                                    validation_stream(seed, 3)));
    }

    std::vector<int> indices;
    for (int n : schedule) {
        if (n >= 1) indices.push_back(n);
    }
    std::vector<double> coefficient_gaps;
    for (int n : indices) {
        coefficient_gaps.push_back(check_coefficient_convergence(seq, n, built.box, validation_stream(seed, 4)));
    }
    reports.push_back(shrinking_series("C1", indices, coefficient_gaps, "sup coefficient gap"));
    reports.push_back(check_initial_convergence(seq, schedule));

    if (seq.has_barrier()) {
        if (built.check_nondegeneracy) {
            reports.push_back(check_nondegeneracy(limit, seq.barrier(0), built.box, validation_stream(seed, 5), 0.0,
                                                  built.boundary_band));
        }
        std::vector<double> barrier_gaps;
        for (int n : indices) {
            barrier_gaps.push_back(check_barrier_convergence(seq, n, built.box, validation_stream(seed, 6)));
        }
        reports.push_back(shrinking_series("G4", indices, barrier_gaps, "sup barrier gap"));
    }
    return reports;
}

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    print_warnings(config, err);
    const BuildOutcome b = build(config, err);
    if (!b.built) return b.status;
    if (config.validation == ValidationMode::skip) {
        out << "validation skipped\n";
        return exit_ok;
    }
    bool all_pass = true;
    for (const auto& r : run_validators(*b.built, config.schedule, config.seed)) {
        out << format_report(r) << '\n';
        all_pass &= r.pass;
    }
    if (!all_pass && config.validation == ValidationMode::strict) return exit_validation_failure;
    return exit_ok;
}

int cmd_converge(const RunConfig& config, std::size_t workers, std::ostream& out, std::ostream& err) {
    print_warnings(config, err);
    if (config.schedule.size() < 2) {
        err << "usage error: schedule needs at least two indices; trend verdict unavailable\n";
        return exit_config_error;
    }
    const BuildOutcome b = build(config, err);
    if (!b.built) return b.status;
    const ScenarioSequence& seq = b.built->sequence;

    ReportContext context;
    context.scenario_params = full_params(config);
    context.notes = config.warnings;
    if (config.validation != ValidationMode::skip) {
        for (const auto& r : run_validators(*b.built, config.schedule, config.seed)) {
            if (r.pass) continue;
            err << format_report(r) << '\n';
            if (config.validation == ValidationMode::strict) return exit_validation_failure;
            context.notes.push_back("validation failed (continued in warn mode): " + r.assumption);
        }
    }
    if (!seq.has_barrier()) context.notes.push_back("scenario has no barrier; hitting statistics unavailable");

    CouplingPlan plan;
    try {
        plan = config.plan();
        plan.validate();
    } catch (const std::invalid_argument& ex) {
        err << "configuration error: " << ex.what() << '\n';
        return exit_config_error;
    }

    RunOptions options;
    options.workers = workers;
    options.validation = std::string(to_string(config.validation));
    options.keep_paths = config.write_paths;
    ConvergenceReport report;
    try {
        report = run_coupled(seq, plan, options);
    } catch (const ExperimentError& ex) {
        err << "experiment failed at path " << ex.path_id() << ", n = " << ex.n() << ": " << ex.what() << '\n';
        return exit_validation_failure;
    }

    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    if (config.write_json) {
        std::ofstream(dir / "report.json", std::ios::binary) << report_json(report, context);
    }
    if (config.write_csv) {
        std::ofstream csv(dir / "summary.csv", std::ios::binary);
        write_summary_csv(csv, report);
    }
    if (config.write_paths) {
        std::ofstream csv(dir / "paths.csv", std::ios::binary);
        write_paths_csv(csv, report);
    }

    out << verdict_line("solution convergence", report.solution) << '\n';
    if (report.has_barrier) out << verdict_line("hit-time convergence", report.hitting) << '\n';
    else out << "hit-time convergence: unavailable (no barrier)\n";
    out << "wall time: " << std::fixed << std::setprecision(3) << report.wall_seconds << " s\n";
    out.unsetf(std::ios::floatfield);

    const bool failed = report.solution.trend == Verdict::non_decreasing ||
                        (report.has_barrier && report.hitting.trend == Verdict::non_decreasing);
    if (failed && config.validation == ValidationMode::strict) return exit_verdict_failure;
    return exit_ok;
}

int cmd_simulate(const RunConfig& config, std::uint64_t path_id, std::ostream& out, std::ostream& err) {
    print_warnings(config, err);
    const BuildOutcome b = build(config, err);
    if (!b.built) return b.status;
    const ScenarioSequence& seq = b.built->sequence;

    std::vector<int> indices{0};
    for (int n : config.schedule) {
        if (n >= 1) indices.push_back(n);
    }
    const TimeGrid grid(config.horizon, config.n_steps);
    const CoefficientSet limit = seq.limit();
    const NoisePath noise = sample_noise(config.seed, path_id, grid, limit.wiener_dim, seq.jumps);
    const AdaptedNoise adapted = adapt_noise(noise);

    std::vector<Trajectory> paths;
    try {
        for (int n : indices) paths.push_back(solve_path(seq.at(n), seq.x0(n), adapted));
    } catch (const NonFiniteError& ex) {
        err << "simulation failed: " << ex.what() << '\n';
        return exit_validation_failure;
    }

    const std::filesystem::path dir(config.out_dir);
    std::filesystem::create_directories(dir);
    const auto file = dir / ("trajectory_" + std::to_string(path_id) + ".csv");
    std::ofstream csv(file, std::ios::binary);
    csv << std::setprecision(std::numeric_limits<double>::max_digits10);
    csv << "time,is_jump";
    for (int n : indices) {
        for (std::size_t i = 0; i < limit.state_dim; ++i) csv << ",x" << i + 1 << "_n" << n;
    }
    csv << '\n';
    const Trajectory& ref = paths.front();
    for (std::size_t j = 0; j < ref.size(); ++j) {
        csv << ref.times[j] << ',' << (ref.is_jump[j] ? 1 : 0);
        for (const Trajectory& t : paths) {
            for (std::size_t i = 0; i < t.dim(); ++i) {
                csv << ',' << t.states(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            }
        }
        csv << '\n';
    }
    out << "wrote " << file.string() << '\n';
    return exit_ok;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Coupled jump-diffusion simulation and convergence experiments", "jumpflow"};
    app.require_subcommand(1);

    struct Options {
        std::string config;
        std::optional<std::string> out_dir;
        std::size_t workers = env_workers();
        std::optional<std::uint64_t> seed;
        bool strict = false, warn = false, skip = false;
        std::optional<std::size_t> paths;
        std::optional<std::string> schedule, eps;
        std::uint64_t path_id = 0;
    } opt;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "configuration file")->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--workers", opt.workers, "worker threads (default: JUMPFLOW_WORKERS or 1)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", opt.seed, "override the master seed");
        auto* s = sub->add_flag("--strict", opt.strict, "fail on any validation failure");
        auto* w = sub->add_flag("--warn", opt.warn, "report validation failures and continue");
        auto* k = sub->add_flag("--skip-validation", opt.skip, "do not run validators");
        s->excludes(w)->excludes(k);
        w->excludes(k);
        sub->add_option("--paths", opt.paths, "Monte Carlo paths");
        sub->add_option("--schedule", opt.schedule, "indices n1,n2,...");
        sub->add_option("--eps", opt.eps, "exceedance levels e1,e2,...");
    };
    auto* validate = app.add_subcommand("validate", "run assumption checks");
    auto* converge = app.add_subcommand("converge", "run the coupled convergence experiment");
    auto* simulate = app.add_subcommand("simulate", "write one coupled trajectory set");
    common(validate);
    common(converge);
    common(simulate);
    simulate->add_option("--path-id", opt.path_id, "path id to simulate");

    std::vector<std::string> argv_storage{"jumpflow"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config_error;
    }

    std::optional<ValidationMode> mode;
    if (opt.strict) mode = ValidationMode::strict;
    if (opt.warn) mode = ValidationMode::warn;
    if (opt.skip) mode = ValidationMode::skip;

    RunConfig config;
    try {
        config = load_config(opt.config, mode);
        if (opt.out_dir) config.out_dir = *opt.out_dir;
        if (opt.seed) config.seed = *opt.seed;
        if (opt.paths) config.paths = *opt.paths;
        if (opt.schedule) config.schedule = parse_int_list(*opt.schedule, "schedule");
        if (opt.eps) config.epsilons = parse_double_list(*opt.eps, "eps");
    } catch (const ConfigError& ex) {
        err << "configuration error: " << ex.what() << '\n';
        return exit_config_error;
    }

    if (validate->parsed()) return cmd_validate(config, out, err);
    if (converge->parsed()) return cmd_converge(config, opt.workers, out, err);
    return cmd_simulate(config, opt.path_id, out, err);
}

}  // namespace jumpflow::cli
