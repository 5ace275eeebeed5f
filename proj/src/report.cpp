#include "jumpflow/report.hpp"

#include <json.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace jumpflow {

namespace {

using Json = nlohmann::ordered_json;

Json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

Json verdict_json(const StatisticVerdict& v) {
    return Json{{"trend", std::string(to_string(v.trend))}, {"verified", v.verified}};
}

std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
    return os.str();
}

std::string csv_time(const HittingTime& t) {
    return t.hit() ? csv_number(t.value) : std::string(to_string(CrossingKind::none));
}

}  // namespace

std::string report_json(const ConvergenceReport& report, const ReportContext& context) {
    Json params = Json::object();
    for (const auto& [k, v] : context.scenario_params) params[k] = v;

    const CouplingPlan& plan = report.plan;
    Json statistics = Json::array();
    for (const IndexStats& s : report.per_n) {
        Json exceed = Json::array();
        for (const ExceedanceStat& e : s.exceedances) {
            exceed.push_back(Json{
                {"eps", e.eps},
                {"delta_count", e.delta_count},
                {"p_delta", number(e.p_delta)},
                {"p_delta_ci", Json::array({number(e.delta_ci.lo), number(e.delta_ci.hi)})},
                {"tau_count", e.tau_count},
                {"p_tau", number(e.p_tau)},
                {"p_tau_ci", Json::array({number(e.tau_ci.lo), number(e.tau_ci.hi)})},
            });
        }
        statistics.push_back(Json{
            {"n", s.n},
            {"mean_sq_delta", number(s.mean_sq_delta)},
            {"se", number(s.se)},
            {"max_delta", number(s.max_delta)},
            {"limit_hits", s.limit_hits},
            {"n_hits", s.n_hits},
            {"mean_hit_gap", report.has_barrier ? number(s.mean_hit_gap) : Json(nullptr)},
            {"exceedances", exceed},
        });
    }

    Json notes = Json::array();
    for (const auto& note : context.notes) notes.push_back(note);

    const Json doc{
        {"schema_version", kReportSchemaVersion},
        {"scenario",
         Json{{"id", report.scenario_id},
              {"has_barrier", report.has_barrier},
              {"horizon", plan.grid.horizon()},
              {"params", params}}},
        {"plan",
         Json{{"seed", plan.master_seed},
              {"paths", plan.paths},
              {"schedule", plan.schedule},
              {"epsilons", plan.epsilons},
              {"n_steps", plan.grid.n_steps()},
              {"refine_hits", plan.refine_hits},
              {"trend_slack", plan.trend_slack},
              {"exceedance_threshold", plan.exceedance_threshold},
              {"confidence", plan.confidence}}},
        {"validation", report.validation},
        {"statistics", statistics},
        {"verdicts",
         Json{{"solution", verdict_json(report.solution)},
              {"hitting", report.has_barrier ? verdict_json(report.hitting)
                                             : verdict_json(StatisticVerdict{})}}},
        {"notes", notes},
    };
    return doc.dump(2) + "\n";
}

void write_summary_csv(std::ostream& os, const ConvergenceReport& report) {
    os << "n,mean_sq_delta,se,eps,p_delta_exceed,p_delta_lo,p_delta_hi,p_tau_exceed,p_tau_lo,p_tau_hi\n";
    for (const IndexStats& s : report.per_n) {
        for (const ExceedanceStat& e : s.exceedances) {
            os << s.n << ',' << csv_number(s.mean_sq_delta) << ',' << csv_number(s.se) << ','
               << csv_number(e.eps) << ',' << csv_number(e.p_delta) << ',' << csv_number(e.delta_ci.lo)
               << ',' << csv_number(e.delta_ci.hi) << ',';
            if (report.has_barrier) {
                os << csv_number(e.p_tau) << ',' << csv_number(e.tau_ci.lo) << ','
                   << csv_number(e.tau_ci.hi);
            } else {
                os << ",,";
            }
            os << '\n';
        }
    }
}

void write_paths_csv(std::ostream& os, const ConvergenceReport& report) {
    os << "path_id,n,sup_distance,tau_limit,tau_n,hit_gap\n";
    for (const PathOutcome& p : report.paths) {
        for (const PathComparison& c : p.per_n) {
            os << p.path_id << ',' << c.n << ',' << csv_number(c.sup_distance) << ','
               << csv_time(c.tau_limit) << ',' << csv_time(c.tau_n) << ',' << csv_number(c.hit_gap)
               << '\n';
        }
    }
}

}  // namespace jumpflow
