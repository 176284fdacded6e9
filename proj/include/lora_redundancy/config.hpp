#pragma once

// JSON scenario configuration.
//
// A configuration is one document covering radio, traffic, link, fading,
// allocation constraints, redundancy schemes, simulation, sweep and lookup
// table settings. Unit suffixes (_dbm, _mhz, _m, _s) are part of the key
// names. Files are merged over `default_config()`, so a file only needs the
// keys it changes; overrides must name keys that already exist.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "airtime.hpp"
#include "allocator.hpp"
#include "analysis.hpp"
#include "channel.hpp"
#include "errors.hpp"
#include "netsim.hpp"

namespace lora_redundancy {

using json = nlohmann::json;

enum class redundancy_policy { none, maximum, calculated };

/// How a scheme picks its redundancy, and the gateway's model for calculated schemes.
struct SchemeSpec {
    std::string name;
    redundancy_policy policy = redundancy_policy::none;
    double assumed_nakagami_m = 1.0;
    DistanceModel assumed_distances{};
    AnalysisModes modes{};
};

struct LookupGrid {
    std::vector<double> distances_m;
    std::vector<int> sensor_counts;
    std::vector<double> nakagami_m;
};

struct ExperimentConfig {
    /// True network: sensor count, radio, traffic, actual fading, link, capture ratio.
    ScenarioParams scenario{};
    Constraints constraints{};
    double target_failure_probability = 1e-3;
    std::map<std::string, SchemeSpec> schemes;
    SimConfig simulation{};
    bool auto_runs = false;
    int max_auto_runs = 200;
    std::vector<int> sweep_sensor_counts;
    std::vector<std::string> sweep_schemes;
    std::vector<double> sweep_targets;
    LookupGrid table_grid;
    /// The merged document the config was built from.
    json document;
};

/// The full default document: a 40-sensor SF10 network on a 12 m x 12 m
/// floor 30-42 m from the gateway, reporting 1 byte every 30 s over three
/// channels.
[[nodiscard]] inline json default_config() {
    return json::parse(R"({
  "sensor_count": 40,
  "radio": {
    "spreading_factor": 10,
    "bandwidth_hz": 125000,
    "preamble_symbols": 8,
    "header_flag": 0,
    "ldro_flag": 0,
    "code_rate_index": 1
  },
  "traffic": {
    "period_s": 30,
    "measurement_bytes": 1,
    "channel_count": 3,
    "duty_limit": 0.01
  },
  "link": {
    "tx_power_dbm": 14,
    "carrier_mhz": 868,
    "pathloss_exponent": 4,
    "sensitivity_dbm": -132
  },
  "fading": { "nakagami_m": 1.0 },
  "capture_ratio": 0.25,
  "constraints": {
    "max_delay_s": 270,
    "memory_measurements": 10,
    "duty_limit": 0.01
  },
  "target_failure_probability": 0.001,
  "schemes": {
    "NR": { "redundancy": "none" },
    "MR": { "redundancy": "maximum" },
    "CR-CF-UD": {
      "redundancy": "calculated",
      "nakagami_m": 1.0,
      "distances": { "type": "uniform", "min_m": 44, "max_m": 57 },
      "interference_mode": "general",
      "fading_mode": "general"
    },
    "CR-CF-ED": {
      "redundancy": "calculated",
      "nakagami_m": 1.0,
      "distances": { "type": "point", "distance_m": 50.5 },
      "interference_mode": "equal_distance",
      "fading_mode": "equal_distance"
    },
    "CR-IF-UD": {
      "redundancy": "calculated",
      "nakagami_m": 1.5,
      "distances": { "type": "uniform", "min_m": 44, "max_m": 57 },
      "interference_mode": "general",
      "fading_mode": "general"
    }
  },
  "simulation": {
    "region": { "x_min_m": 30, "x_max_m": 42, "y_min_m": 30, "y_max_m": 42 },
    "positions_m": null,
    "duration_s": 10800,
    "runs": 20,
    "max_auto_runs": 200,
    "seed": 1,
    "channel_frequencies_mhz": [860, 864, 868],
    "energy_watts": null,
    "capture_lock_symbols": 3,
    "subsensitivity_interference": true,
    "fading_enabled": true,
    "threads": 0
  },
  "sweep": {
    "sensor_counts": [40, 60, 80, 100, 120, 140, 160],
    "schemes": ["NR", "MR", "CR-CF-UD", "CR-CF-ED", "CR-IF-UD"],
    "target_failure_probabilities": [0.001]
  },
  "table": {
    "distances_m": [50.5],
    "sensor_counts": [40, 60, 80, 100, 120, 140, 160],
    "nakagami_m": [1.0]
  }
})");
}

namespace detail {

template <class T>
T get(const json& j, const char* key) {
    if (!j.contains(key)) {
        throw config_error(std::string("missing configuration key '") + key + "'");
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw config_error(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline DistanceModel parse_distances(const json& j) {
    const auto type = get<std::string>(j, "type");
    if (type == "point") {
        return DistanceModel::point(get<double>(j, "distance_m"));
    }
    if (type == "uniform") {
        return DistanceModel::uniform(get<double>(j, "min_m"), get<double>(j, "max_m"));
    }
    if (type == "empirical") {
        return DistanceModel(EmpiricalDistance{get<std::vector<double>>(j, "distances_m"),
                                               get<std::vector<double>>(j, "weights")});
    }
    throw config_error("unknown distance model type '" + type + "'");
}

inline SchemeSpec parse_scheme(const std::string& name, const json& j) {
    SchemeSpec s;
    s.name = name;
    const auto policy = get<std::string>(j, "redundancy");
    if (policy == "none") {
        s.policy = redundancy_policy::none;
        return s;
    }
    if (policy == "maximum") {
        s.policy = redundancy_policy::maximum;
        return s;
    }
    if (policy != "calculated") {
        throw config_error("unknown redundancy policy '" + policy + "' for scheme " + name);
    }
    s.policy = redundancy_policy::calculated;
    s.assumed_nakagami_m = get<double>(j, "nakagami_m");
    s.assumed_distances = parse_distances(j.at("distances"));
    const auto im = get<std::string>(j, "interference_mode");
    const auto fm = get<std::string>(j, "fading_mode");
    if ((im != "general" && im != "equal_distance") || (fm != "general" && fm != "equal_distance")) {
        throw config_error("scheme " + name + ": modes must be 'general' or 'equal_distance'");
    }
    s.modes.interference = im == "general" ? interference_mode::general : interference_mode::equal_distance;
    s.modes.fading_equal_distance = fm == "equal_distance";
    if (j.contains("interferer_count")) {
        s.modes.interferers = get<std::string>(j, "interferer_count") == "exact" ? interferer_count_model::exact
                                                                                 : interferer_count_model::poisson;
    }
    return s;
}

inline json* find_path(json& doc, std::string_view path) {
    json* node = &doc;
    std::size_t pos = 0;
    while (pos <= path.size()) {
        const std::size_t dot = path.find('.', pos);
        const std::string key(path.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos));
        if (!node->is_object() || !node->contains(key)) {
            return nullptr;
        }
        node = &(*node)[key];
        if (dot == std::string_view::npos) {
            break;
        }
        pos = dot + 1;
    }
    return node;
}

} // namespace detail

/// Applies `key.path=value`. The value is parsed as JSON when possible and
/// taken as a string otherwise.
inline void apply_override(json& doc, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw config_error("override must have the form key=value: " + std::string(assignment));
    }
    const auto key = assignment.substr(0, eq);
    const std::string raw(assignment.substr(eq + 1));
    json* target = detail::find_path(doc, key);
    if (target == nullptr) {
        throw config_error("override names an unknown configuration key: " + std::string(key));
    }
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
        value = raw;
    }
    *target = std::move(value);
}

/// Recursive overlay of `file` onto `doc`. Unlike a JSON merge patch, an
/// explicit null is kept as a value rather than deleting the key.
inline void overlay(json& doc, const json& file) {
    if (!doc.is_object() || !file.is_object()) {
        doc = file;
        return;
    }
    for (const auto& [key, value] : file.items()) {
        overlay(doc[key], value);
    }
}

[[nodiscard]] inline json load_config_document(const std::string& path, const std::vector<std::string>& overrides = {}) {
    json doc = default_config();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) {
            throw config_error("cannot open configuration file " + path);
        }
        json file = json::parse(in, nullptr, false);
        if (file.is_discarded()) {
            throw config_error("configuration file is not valid JSON: " + path);
        }
        overlay(doc, file);
    }
    for (const auto& o : overrides) {
        apply_override(doc, o);
    }
    return doc;
}

[[nodiscard]] inline ExperimentConfig parse_config(const json& doc) {
    using detail::get;
    ExperimentConfig cfg;
    cfg.document = doc;
    try {
        auto& sc = cfg.scenario;
        sc.sensor_count = get<int>(doc, "sensor_count");
        const auto& radio = doc.at("radio");
        sc.radio.spreading_factor = get<int>(radio, "spreading_factor");
        sc.radio.bandwidth_hz = get<double>(radio, "bandwidth_hz");
        sc.radio.preamble_symbols = get<int>(radio, "preamble_symbols");
        sc.radio.header_flag = get<int>(radio, "header_flag");
        sc.radio.ldro_flag = get<int>(radio, "ldro_flag");
        sc.radio.code_rate_index = get<int>(radio, "code_rate_index");
        const auto& traffic = doc.at("traffic");
        sc.traffic.period_s = get<double>(traffic, "period_s");
        sc.traffic.measurement_bytes = get<int>(traffic, "measurement_bytes");
        sc.traffic.channel_count = get<int>(traffic, "channel_count");
        sc.traffic.duty_limit = get<double>(traffic, "duty_limit");
        const auto& link = doc.at("link");
        sc.link = LinkBudget::from_dbm(get<double>(link, "tx_power_dbm"), get<double>(link, "carrier_mhz"),
                                       get<double>(link, "pathloss_exponent"), get<double>(link, "sensitivity_dbm"));
        sc.fading = FadingModel(get<double>(doc.at("fading"), "nakagami_m"));
        sc.capture_ratio = get<double>(doc, "capture_ratio");
        sc.validate();

        const auto& cons = doc.at("constraints");
        cfg.constraints.max_delay_s = get<double>(cons, "max_delay_s");
        cfg.constraints.memory_measurements = get<int>(cons, "memory_measurements");
        cfg.constraints.duty_limit = get<double>(cons, "duty_limit");
        cfg.constraints.validate();
        cfg.target_failure_probability = get<double>(doc, "target_failure_probability");

        for (const auto& [name, body] : doc.at("schemes").items()) {
            cfg.schemes.emplace(name, detail::parse_scheme(name, body));
        }

        const auto& sim = doc.at("simulation");
        auto& sc_sim = cfg.simulation;
        sc_sim.scenario = sc;
        const auto& region = sim.at("region");
        sc_sim.region = {get<double>(region, "x_min_m"), get<double>(region, "x_max_m"), get<double>(region, "y_min_m"),
                         get<double>(region, "y_max_m")};
        if (!sim.at("positions_m").is_null()) {
            std::vector<Position> pos;
            for (const auto& p : sim.at("positions_m")) {
                pos.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
            }
            sc_sim.positions = std::move(pos);
        }
        sc_sim.duration_s = get<double>(sim, "duration_s");
        const auto& runs = sim.at("runs");
        if (runs.is_string()) {
            if (runs.get<std::string>() != "auto") {
                throw config_error("simulation.runs must be a positive integer or \"auto\"");
            }
            cfg.auto_runs = true;
            sc_sim.runs = 1;
        } else {
            sc_sim.runs = runs.get<int>();
        }
        cfg.max_auto_runs = get<int>(sim, "max_auto_runs");
        sc_sim.seed = get<std::uint64_t>(sim, "seed");
        sc_sim.channel_frequencies_hz.clear();
        for (double mhz : get<std::vector<double>>(sim, "channel_frequencies_mhz")) {
            sc_sim.channel_frequencies_hz.push_back(mhz * 1e6);
        }
        if (static_cast<int>(sc_sim.channel_frequencies_hz.size()) != sc.traffic.channel_count) {
            throw config_error("traffic.channel_count must equal the number of simulation channel frequencies");
        }
        if (!sim.at("energy_watts").is_null()) {
            sc_sim.energy_watts = get<double>(sim, "energy_watts");
        }
        sc_sim.capture_lock_symbols = get<int>(sim, "capture_lock_symbols");
        sc_sim.subsensitivity_interference = get<bool>(sim, "subsensitivity_interference");
        sc_sim.fading_enabled = get<bool>(sim, "fading_enabled");
        sc_sim.threads = get<unsigned>(sim, "threads");

        const auto& sweep = doc.at("sweep");
        cfg.sweep_sensor_counts = get<std::vector<int>>(sweep, "sensor_counts");
        cfg.sweep_schemes = get<std::vector<std::string>>(sweep, "schemes");
        cfg.sweep_targets = get<std::vector<double>>(sweep, "target_failure_probabilities");

        const auto& table = doc.at("table");
        cfg.table_grid.distances_m = get<std::vector<double>>(table, "distances_m");
        cfg.table_grid.sensor_counts = get<std::vector<int>>(table, "sensor_counts");
        cfg.table_grid.nakagami_m = get<std::vector<double>>(table, "nakagami_m");
    } catch (const json::exception& e) {
        throw config_error(std::string("malformed configuration: ") + e.what());
    } catch (const invalid_parameter& e) {
        throw config_error(std::string("invalid configuration: ") + e.what());
    }
    return cfg;
}

[[nodiscard]] inline ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    return parse_config(load_config_document(path, overrides));
}

/// FNV-1a over the compact dump of the scenario-defining part of a document.
[[nodiscard]] inline std::string scenario_hash(const json& doc) {
    json subset = doc;
    for (const char* k : {"sweep", "table"}) {
        subset.erase(k);
    }
    const std::string text = subset.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

} // namespace lora_redundancy
