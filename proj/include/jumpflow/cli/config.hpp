#pragma once

#include "jumpflow/experiments.hpp"
#include "jumpflow/scenarios.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace jumpflow::cli {

inline constexpr int kConfigSchemaVersion = 1;

enum class ValidationMode { strict, warn, skip };

std::string_view to_string(ValidationMode mode);

/// Parse or schema error. `line` is 0 when the problem is not tied to a line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::size_t line = 0, std::string key = {})
        : std::runtime_error(what), line_(line), key_(std::move(key)) {}
    std::size_t line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    std::size_t line_;
    std::string key_;
};

struct RunConfig {
    int schema_version = kConfigSchemaVersion;
    std::string scenario;
    ParamMap params;
    double horizon = 1.0;

    std::uint64_t seed = 0;
    std::size_t paths = 2000;
    std::vector<int> schedule{1, 4, 16, 64};
    std::vector<double> epsilons{0.1};
    std::size_t n_steps = 1000;
    bool refine_hits = true;
    double trend_slack = 0.1;
    double exceedance_threshold = 0.05;
    double confidence = 0.95;

    std::string out_dir = "jumpflow-out";
    bool write_json = true;
    bool write_csv = true;
    bool write_paths = false;

    ValidationMode validation = ValidationMode::strict;
    /// Unknown keys seen outside strict mode.
    std::vector<std::string> warnings;

    CouplingPlan plan() const;
};

/*
 * Line-oriented key = value text. '#' starts a comment, [section] switches
 * section. Recognized keys:
 *
 *   (top)        schema_version, scenario, horizon
 *   [params]     template parameters of the chosen scenario
 *   [plan]       seed, paths, schedule, eps, n_steps, refine_hits,
 *                trend_slack, exceedance_threshold, confidence
 *   [output]     dir, formats (json,csv), paths_csv
 *   [validation] mode (strict, warn, skip)
 *
 * schema_version, scenario and horizon are required. Unknown keys are errors
 * in strict mode and warnings otherwise; `mode_override` takes precedence over
 * the file's validation mode.
 */
RunConfig parse_config(const std::string& text, std::optional<ValidationMode> mode_override = {});
RunConfig load_config(const std::string& path, std::optional<ValidationMode> mode_override = {});

std::vector<int> parse_int_list(const std::string& text, const std::string& key);
std::vector<double> parse_double_list(const std::string& text, const std::string& key);

}  // namespace jumpflow::cli
