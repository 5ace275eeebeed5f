#include "jumpflow/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace jumpflow::cli {

std::string_view to_string(ValidationMode mode) {
    switch (mode) {
        case ValidationMode::strict: return "strict";
        case ValidationMode::warn: return "warn";
        case ValidationMode::skip: return "skip";
    }
    return "unknown";
}

CouplingPlan RunConfig::plan() const {
    CouplingPlan p;
    p.master_seed = seed;
    p.paths = paths;
    p.schedule = schedule;
    p.epsilons = epsilons;
    p.grid = TimeGrid(horizon, n_steps);
    p.refine_hits = refine_hits;
    p.trend_slack = trend_slack;
    p.exceedance_threshold = exceedance_threshold;
    p.confidence = confidence;
    return p;
}

namespace {

struct Entry {
    std::string section;
    std::string key;
    std::string value;
    std::size_t line = 0;
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) items.push_back(trim(item));
    return items;
}

ConfigError bad_value(const Entry& e, const std::string& expected) {
    return ConfigError("line " + std::to_string(e.line) + ": key '" + e.key + "': expected " + expected +
                           ", got '" + e.value + "'",
                       e.line, e.key);
}

double to_double(const Entry& e) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(e.value, &used);
    } catch (const std::exception&) {
        throw bad_value(e, "a number");
    }
    if (used != e.value.size() || !std::isfinite(v)) throw bad_value(e, "a finite number");
    return v;
}

template <typename Int>
Int to_int(const std::string& text, const Entry& e) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) throw bad_value(e, "an integer");
    return v;
}

bool to_bool(const Entry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw bad_value(e, "true or false");
}

ValidationMode to_mode(const Entry& e) {
    if (e.value == "strict") return ValidationMode::strict;
    if (e.value == "warn") return ValidationMode::warn;
    if (e.value == "skip") return ValidationMode::skip;
    throw bad_value(e, "strict, warn or skip");
}

std::vector<Entry> tokenize(const std::string& text) {
    std::vector<Entry> entries;
    std::set<std::pair<std::string, std::string>> seen;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header '" + line + "'",
                                  line_no);
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'",
                              line_no);
        }
        Entry e{section, trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
                line_no};
        if (e.key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": empty key", line_no);
        }
        if (!seen.emplace(e.section, e.key).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + e.key + "'", line_no, e.key);
        }
        entries.push_back(std::move(e));
    }
    return entries;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text, const std::string& key) {
    const Entry e{"", key, text, 0};
    std::vector<int> out;
    for (const auto& item : split_list(text)) out.push_back(to_int<int>(item, e));
    if (out.empty()) throw bad_value(e, "a non-empty list of integers");
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(to_double(Entry{"", key, item, 0}));
    if (out.empty()) throw bad_value(Entry{"", key, text, 0}, "a non-empty list of numbers");
    return out;
}

RunConfig parse_config(const std::string& text, std::optional<ValidationMode> mode_override) {
    const std::vector<Entry> entries = tokenize(text);
    RunConfig cfg;

    // The mode decides how unknown keys are treated, so settle it first.
    for (const Entry& e : entries) {
        if (e.section == "validation" && e.key == "mode") cfg.validation = to_mode(e);
    }
    if (mode_override) cfg.validation = *mode_override;

    auto unknown = [&](const Entry& e) {
        const std::string where = e.section.empty() ? "top level" : "section [" + e.section + "]";
        const std::string msg = "line " + std::to_string(e.line) + ": unknown key '" + e.key + "' in " + where;
        if (cfg.validation == ValidationMode::strict) throw ConfigError(msg, e.line, e.key);
        cfg.warnings.push_back(msg);
    };

    std::set<std::string> required{"schema_version", "scenario", "horizon"};
    std::vector<Entry> params;
    for (const Entry& e : entries) {
        if (e.section.empty()) {
            if (e.key == "schema_version") {
                cfg.schema_version = to_int<int>(e.value, e);
                if (cfg.schema_version != kConfigSchemaVersion) {
                    throw ConfigError("line " + std::to_string(e.line) + ": unsupported schema_version " + e.value +
                                          " (expected " + std::to_string(kConfigSchemaVersion) + ")",
                                      e.line, e.key);
                }
            } else if (e.key == "scenario") {
                cfg.scenario = e.value;
            } else if (e.key == "horizon") {
                cfg.horizon = to_double(e);
                if (!(cfg.horizon > 0.0)) throw bad_value(e, "a positive number");
            } else {
                unknown(e);
                continue;
            }
            required.erase(e.key);
        } else if (e.section == "params") {
            params.push_back(e);
        } else if (e.section == "plan") {
            if (e.key == "seed") cfg.seed = to_int<std::uint64_t>(e.value, e);
            else if (e.key == "paths") cfg.paths = to_int<std::size_t>(e.value, e);
            else if (e.key == "schedule") cfg.schedule = parse_int_list(e.value, e.key);
            else if (e.key == "eps") cfg.epsilons = parse_double_list(e.value, e.key);
            else if (e.key == "n_steps") cfg.n_steps = to_int<std::size_t>(e.value, e);
            else if (e.key == "refine_hits") cfg.refine_hits = to_bool(e);
            else if (e.key == "trend_slack") cfg.trend_slack = to_double(e);
            else if (e.key == "exceedance_threshold") cfg.exceedance_threshold = to_double(e);
            else if (e.key == "confidence") cfg.confidence = to_double(e);
            else unknown(e);
        } else if (e.section == "output") {
            if (e.key == "dir") {
                cfg.out_dir = e.value;
            } else if (e.key == "formats") {
                cfg.write_json = cfg.write_csv = false;
                for (const auto& f : split_list(e.value)) {
                    if (f == "json") cfg.write_json = true;
                    else if (f == "csv") cfg.write_csv = true;
                    else throw bad_value(e, "a subset of json,csv");
                }
            } else if (e.key == "paths_csv") {
                cfg.write_paths = to_bool(e);
            } else {
                unknown(e);
            }
        } else if (e.section == "validation") {
            if (e.key != "mode") unknown(e);
        } else {
            unknown(e);
        }
    }
    if (!required.empty()) {
        const std::string key = *required.begin();
        throw ConfigError("missing required key '" + key + "'", 0, key);
    }
    if (cfg.n_steps == 0) throw ConfigError("key 'n_steps' must be positive", 0, "n_steps");
    if (cfg.paths == 0) throw ConfigError("key 'paths' must be positive", 0, "paths");

    const ScenarioTemplate* tmpl = nullptr;
    try {
        tmpl = &find_template(cfg.scenario);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(ex.what(), 0, "scenario");
    }
    for (const Entry& e : params) {
        const bool known = std::any_of(tmpl->params.begin(), tmpl->params.end(),
                                       [&](const ParamSpec& p) { return p.name == e.key; });
        if (known) cfg.params[e.key] = e.value;
        else unknown(e);
    }
    return cfg;
}

RunConfig load_config(const std::string& path, std::optional<ValidationMode> mode_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), mode_override);
}

}  // namespace jumpflow::cli
