#pragma once

// Schemes, simulation sweeps and their serialized reports.

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "allocator.hpp"
#include "config.hpp"
#include "netsim.hpp"
#include "version.hpp"

namespace lora_redundancy {

/// The gateway's model of the network for a calculated scheme: the true
/// scenario with the scheme's assumed fading and distance models.
[[nodiscard]] inline ScenarioParams assumed_scenario(const ScenarioParams& truth, const SchemeSpec& scheme) {
    ScenarioParams sc = truth;
    sc.fading = FadingModel(scheme.assumed_nakagami_m);
    sc.distances = scheme.assumed_distances;
    return sc;
}

[[nodiscard]] inline AnalysisModes scheme_modes(const SchemeSpec& scheme) {
    AnalysisModes modes = scheme.modes;
    if (modes.fading_equal_distance && !modes.equal_distance_m) {
        modes.equal_distance_m = scheme.assumed_distances.mean();
    }
    return modes;
}

struct SchemeDecision {
    int redundancy = 0;
    int r_max = 0;
    std::optional<AllocationResult> allocation;
};

/// Redundancy used by `scheme` for the given true scenario and target.
[[nodiscard]] inline SchemeDecision resolve_scheme(const SchemeSpec& scheme, const ScenarioParams& truth,
                                                   const Constraints& constraints, double target) {
    SchemeDecision d;
    d.r_max = compute_r_max(constraints, truth.radio, truth.traffic);
    switch (scheme.policy) {
    case redundancy_policy::none:
        d.redundancy = 0;
        break;
    case redundancy_policy::maximum:
        d.redundancy = d.r_max;
        break;
    case redundancy_policy::calculated:
        d.allocation = allocate(assumed_scenario(truth, scheme), constraints, target, scheme_modes(scheme));
        d.redundancy = d.allocation->r_tilde;
        break;
    }
    return d;
}

[[nodiscard]] inline const SchemeSpec& find_scheme(const ExperimentConfig& cfg, const std::string& name) {
    const auto it = cfg.schemes.find(name);
    if (it == cfg.schemes.end()) {
        throw config_error("unknown scheme '" + name + "'");
    }
    return it->second;
}

/// Simulates the configured network with a fixed redundancy, honouring the
/// automatic run-count rule when enabled.
[[nodiscard]] inline SimReport simulate_with(const ExperimentConfig& cfg, SimConfig sim) {
    if (cfg.auto_runs) {
        return simulate_until_reliable(sim, 1, cfg.max_auto_runs);
    }
    return simulate(sim);
}

struct SweepRow {
    int sensor_count = 0;
    std::string scheme;
    double target = 0.0;
    int redundancy = 0;
    int runs = 0;
    double mean_frame_loss = 0.0;
    double mlr = 0.0;
    double mlr_direct = 0.0;
    double e_m_mj = 0.0;
    std::size_t frames_sent = 0;
    bool runs_rule_satisfied = false;
};

[[nodiscard]] inline SweepRow simulate_scheme(const ExperimentConfig& cfg, const std::string& scheme_name,
                                              int sensor_count, double target) {
    ScenarioParams truth = cfg.scenario;
    truth.sensor_count = sensor_count;
    const auto decision = resolve_scheme(find_scheme(cfg, scheme_name), truth, cfg.constraints, target);
    SimConfig sim = cfg.simulation;
    sim.scenario = truth;
    sim.redundancy = decision.redundancy;
    if (sim.positions && static_cast<int>(sim.positions->size()) != sensor_count) {
        sim.positions.reset();
    }
    const SimReport rep = simulate_with(cfg, sim);
    SweepRow row;
    row.sensor_count = sensor_count;
    row.scheme = scheme_name;
    row.target = target;
    row.redundancy = decision.redundancy;
    row.runs = static_cast<int>(rep.runs.size());
    row.mean_frame_loss = rep.mean_frame_loss;
    row.mlr = rep.mlr;
    row.mlr_direct = rep.mlr_direct;
    row.e_m_mj = rep.e_m_mj;
    row.frames_sent = rep.frames_sent;
    row.runs_rule_satisfied = rep.runs_rule_satisfied;
    return row;
}

/// Rows ordered by target, then scheme, then sensor count.
[[nodiscard]] inline std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
    std::vector<SweepRow> rows;
    for (double target : cfg.sweep_targets) {
        for (const auto& scheme : cfg.sweep_schemes) {
            for (int n : cfg.sweep_sensor_counts) {
                rows.push_back(simulate_scheme(cfg, scheme, n, target));
            }
        }
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "n,scheme,target_p_fail,r_tilde,runs,rho_mean,mlr,mlr_direct,e_m_mj,frames_sent\n";
    out.precision(10);
    for (const auto& r : rows) {
        out << r.sensor_count << ',' << r.scheme << ',' << r.target << ',' << r.redundancy << ',' << r.runs << ','
            << r.mean_frame_loss << ',' << r.mlr << ',' << r.mlr_direct << ',' << r.e_m_mj << ',' << r.frames_sent
            << '\n';
    }
}

[[nodiscard]] inline json to_json(const OutageBreakdown& o) {
    return {{"p_interference", o.p_interference},
            {"p_fading", o.p_fading},
            {"p_frame_loss", o.p_frame_loss},
            {"p_fail", o.p_fail}};
}

[[nodiscard]] inline json to_json(const AllocationResult& a) {
    json profile = json::array();
    for (std::size_t r = 0; r < a.profile.size(); ++r) {
        json row = to_json(a.profile[r]);
        row["r"] = r;
        row["objective"] = a.objective_values[r];
        profile.push_back(std::move(row));
    }
    return {{"objective", a.objective == objective_kind::energy ? "energy_mj" : "failure_probability"},
            {"target", a.target},
            {"target_met", a.target_met},
            {"r_max", a.r_max},
            {"r_star", a.r_star},
            {"r_tilde", a.r_tilde},
            {"profile", std::move(profile)}};
}

[[nodiscard]] inline json to_json(const SimReport& rep) {
    return {{"redundancy", rep.redundancy},
            {"runs", rep.runs.size()},
            {"frame_loss", rep.frame_loss},
            {"mean_frame_loss", rep.mean_frame_loss},
            {"mlr", rep.mlr},
            {"mlr_direct", rep.mlr_direct},
            {"e_m_mj", std::isfinite(rep.e_m_mj) ? json(rep.e_m_mj) : json(nullptr)},
            {"frames_sent", rep.frames_sent},
            {"frames_delivered", rep.losses.delivered},
            {"frames_lost_fading", rep.losses.lost_fading},
            {"frames_lost_interference", rep.losses.lost_interference},
            {"runs_rule_satisfied", rep.runs_rule_satisfied}};
}

[[nodiscard]] inline json to_json(const SweepRow& r) {
    return {{"n", r.sensor_count},       {"scheme", r.scheme}, {"target_p_fail", r.target},
            {"r_tilde", r.redundancy},   {"runs", r.runs},     {"rho_mean", r.mean_frame_loss},
            {"mlr", r.mlr},              {"mlr_direct", r.mlr_direct},
            {"e_m_mj", std::isfinite(r.e_m_mj) ? json(r.e_m_mj) : json(nullptr)},
            {"frames_sent", r.frames_sent}};
}

/// One line per frame of one run.
inline void write_events_csv(std::ostream& out, const std::vector<FrameEvent>& events) {
    out << "sender,sequence,start_s,end_s,channel,power_dbm,outcome\n";
    out.precision(12);
    for (const auto& e : events) {
        out << e.sender << ',' << e.sequence << ',' << e.start_s << ',' << e.end_s << ',' << e.channel << ','
            << watts_to_dbm(e.received_power_w) << ',' << to_string(e.outcome) << '\n';
    }
}

} // namespace lora_redundancy
