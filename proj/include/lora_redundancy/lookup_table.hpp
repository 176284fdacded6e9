#pragma once

// Precomputed redundancy table for the gateway, indexed by distance, sensor
// count and Nakagami shape.

#include <algorithm>
#include <atomic>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "allocator.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "version.hpp"

namespace lora_redundancy {

struct LookupEntry {
    double distance_m = 0.0;
    int sensor_count = 0;
    double nakagami_m = 1.0;
    int r_star = 0;
    int r_tilde = 0;
    double p_fail_at_r_tilde = 0.0;
    bool target_met = false;
    /// Set when the cell could not be computed; the other fields are then unset.
    std::optional<std::string> failure;
};

struct LookupTable {
    LookupGrid grid;
    double target = 0.0;
    std::vector<LookupEntry> entries;
};

/// One cell: equal-distance analysis at distance d.
[[nodiscard]] inline LookupEntry compute_lookup_entry(const ScenarioParams& base, const Constraints& constraints,
                                                      double target, double d, int n, double m) {
    LookupEntry e;
    e.distance_m = d;
    e.sensor_count = n;
    e.nakagami_m = m;
    try {
        ScenarioParams sc = base;
        sc.sensor_count = n;
        sc.fading = FadingModel(m);
        sc.distances = DistanceModel::point(d);
        const auto res = allocate(sc, constraints, target, AnalysisModes::equal_distance(d));
        e.r_star = res.r_star;
        e.r_tilde = res.r_tilde;
        e.p_fail_at_r_tilde = res.profile[static_cast<std::size_t>(res.r_tilde)].p_fail;
        e.target_met = res.target_met;
    } catch (const std::exception& ex) {
        e.failure = ex.what();
    }
    return e;
}

/// Entries are ordered distance, then sensor count, then shape, whatever
/// the thread count.
[[nodiscard]] inline LookupTable build_lookup_table(const ScenarioParams& base, const Constraints& constraints,
                                                    double target, const LookupGrid& grid, unsigned threads = 0) {
    detail::require(!grid.distances_m.empty() && !grid.sensor_counts.empty() && !grid.nakagami_m.empty(),
                    "lookup grid axes must be non-empty");
    LookupTable table;
    table.grid = grid;
    table.target = target;
    const std::size_t nd = grid.distances_m.size();
    const std::size_t nn = grid.sensor_counts.size();
    const std::size_t nm = grid.nakagami_m.size();
    table.entries.resize(nd * nn * nm);
    unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(table.entries.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < table.entries.size(); i = next++) {
            const std::size_t id = i / (nn * nm);
            const std::size_t in = (i / nm) % nn;
            const std::size_t im = i % nm;
            table.entries[i] = compute_lookup_entry(base, constraints, target, grid.distances_m[id],
                                                    grid.sensor_counts[in], grid.nakagami_m[im]);
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back(work);
        }
    }
    return table;
}

inline void write_lookup_csv(std::ostream& out, const LookupTable& table) {
    out << "distance_m,n,m,r_star,r_tilde,p_fail_at_r_tilde\n";
    out.precision(17);
    for (const auto& e : table.entries) {
        out << e.distance_m << ',' << e.sensor_count << ',' << e.nakagami_m << ',';
        if (e.failure) {
            out << ",,\n";
        } else {
            out << e.r_star << ',' << e.r_tilde << ',' << e.p_fail_at_r_tilde << '\n';
        }
    }
}

[[nodiscard]] inline json lookup_metadata(const LookupTable& table, const json& config_document) {
    json failures = json::array();
    for (const auto& e : table.entries) {
        if (e.failure) {
            failures.push_back({{"distance_m", e.distance_m}, {"n", e.sensor_count}, {"m", e.nakagami_m},
                                {"error", *e.failure}});
        }
    }
    json unmet = json::array();
    for (const auto& e : table.entries) {
        if (!e.failure && !e.target_met) {
            unmet.push_back({{"distance_m", e.distance_m}, {"n", e.sensor_count}, {"m", e.nakagami_m}});
        }
    }
    return {{"grid",
             {{"distances_m", table.grid.distances_m},
              {"sensor_counts", table.grid.sensor_counts},
              {"nakagami_m", table.grid.nakagami_m}}},
            {"target_p_fail", table.target},
            {"scenario_hash", scenario_hash(config_document)},
            {"tool_version", library_version},
            {"failed_cells", std::move(failures)},
            {"target_not_met", std::move(unmet)}};
}

/// Parses a table written by `write_lookup_csv`. Failed cells come back with
/// `failure` set.
[[nodiscard]] inline std::vector<LookupEntry> read_lookup_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("distance_m,n,m,", 0) != 0) {
        throw config_error("lookup table is missing its header");
    }
    std::vector<LookupEntry> out;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        while (cells.size() < 6) {
            cells.emplace_back();
        }
        LookupEntry e;
        try {
            e.distance_m = std::stod(cells[0]);
            e.sensor_count = std::stoi(cells[1]);
            e.nakagami_m = std::stod(cells[2]);
            if (cells[3].empty()) {
                e.failure = "failed";
            } else {
                e.r_star = std::stoi(cells[3]);
                e.r_tilde = std::stoi(cells[4]);
                e.p_fail_at_r_tilde = std::stod(cells[5]);
            }
        } catch (const std::exception&) {
            throw config_error("malformed lookup table row: " + line);
        }
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace lora_redundancy
