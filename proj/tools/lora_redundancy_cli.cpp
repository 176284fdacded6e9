// Command-line experiment runner.
//
//   lora_redundancy allocate [--scheme CR-CF-UD,...]
//   lora_redundancy simulate [--scheme NR | --redundancy R] [--events PATH]
//   lora_redundancy sweep    [--scheme NR,MR,...] [--runs N|auto]
//   lora_redundancy table    --out table.csv
//
// Exit codes: 0 success, 1 internal error, 2 target not met, 3 usage.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <lora_redundancy.hpp>

namespace lr = lora_redundancy;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_internal = 1;
constexpr int exit_target_not_met = 2;
constexpr int exit_usage = 3;

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> schemes;
    std::string runs;
};

lr::ExperimentConfig load(const CommonOptions& o) {
    std::vector<std::string> overrides = o.overrides;
    if (o.seed) {
        overrides.push_back("simulation.seed=" + std::to_string(*o.seed));
    }
    if (!o.runs.empty()) {
        if (o.runs == "auto") {
            overrides.emplace_back("simulation.runs=\"auto\"");
        } else {
            int n = 0;
            try {
                std::size_t used = 0;
                n = std::stoi(o.runs, &used);
                if (used != o.runs.size()) {
                    n = 0;
                }
            } catch (const std::exception&) {
                n = 0;
            }
            if (n < 1) {
                throw usage_error("--runs expects a positive integer or 'auto'");
            }
            overrides.push_back("simulation.runs=" + std::to_string(n));
        }
    }
    return lr::load_config(o.config_path, overrides);
}

// Writes to --out when given, stdout otherwise.
void emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw usage_error("cannot write " + path);
    }
    out << text;
}

int cmd_allocate(const CommonOptions& o) {
    const auto cfg = load(o);
    std::vector<std::string> names = o.schemes;
    if (names.empty()) {
        for (const auto& [name, s] : cfg.schemes) {
            if (s.policy == lr::redundancy_policy::calculated) {
                names.push_back(name);
            }
        }
    }
    if (names.empty()) {
        throw usage_error("no calculated schemes to allocate for");
    }
    bool all_met = true;
    lr::json doc = lr::json::object();
    std::ostringstream text;
    text << "n = " << cfg.scenario.sensor_count << ", P_t = " << cfg.target_failure_probability << '\n';
    for (const auto& name : names) {
        const auto& scheme = lr::find_scheme(cfg, name);
        const auto d = lr::resolve_scheme(scheme, cfg.scenario, cfg.constraints, cfg.target_failure_probability);
        text << '\n' << name << ": r_max = " << d.r_max;
        if (!d.allocation) {
            text << ", r = " << d.redundancy << " (fixed)\n";
            doc[name] = {{"r_max", d.r_max}, {"redundancy", d.redundancy}};
            continue;
        }
        const auto& a = *d.allocation;
        all_met = all_met && a.target_met;
        text << ", r* = " << a.r_star << ", r~ = " << a.r_tilde << (a.target_met ? "" : "  (target not met)")
             << "\n   r        P_i        P_f     P_fail\n";
        for (std::size_t r = 0; r < a.profile.size(); ++r) {
            const auto& p = a.profile[r];
            text << std::setw(4) << r << std::scientific << std::setprecision(3) << std::setw(11)
                 << p.p_interference << std::setw(11) << p.p_fading << std::setw(11) << p.p_fail << '\n'
                 << std::defaultfloat;
        }
        doc[name] = lr::to_json(a);
    }
    std::cout << text.str();
    if (!o.out.empty()) {
        emit(o.out, doc.dump(2) + "\n");
    }
    return all_met ? exit_ok : exit_target_not_met;
}

int cmd_simulate(const CommonOptions& o, std::optional<int> redundancy, const std::string& events_path) {
    const auto cfg = load(o);
    if (o.schemes.size() > 1) {
        throw usage_error("simulate takes a single scheme");
    }
    lr::SimConfig sim = cfg.simulation;
    std::string label;
    if (redundancy) {
        if (!o.schemes.empty()) {
            throw usage_error("--scheme and --redundancy are mutually exclusive");
        }
        sim.redundancy = *redundancy;
        label = "fixed";
    } else {
        label = o.schemes.empty() ? "NR" : o.schemes.front();
        sim.redundancy = lr::resolve_scheme(lr::find_scheme(cfg, label), cfg.scenario, cfg.constraints,
                                            cfg.target_failure_probability)
                             .redundancy;
    }
    sim.keep_events = !events_path.empty();
    const auto rep = lr::simulate_with(cfg, sim);
    lr::json doc = lr::to_json(rep);
    doc["scheme"] = label;
    doc["n"] = cfg.scenario.sensor_count;
    doc["seed"] = sim.seed;
    emit(o.out, doc.dump(2) + "\n");
    if (!events_path.empty()) {
        std::ostringstream csv;
        lr::write_events_csv(csv, rep.runs.front().events);
        emit(events_path, csv.str());
    }
    return exit_ok;
}

int cmd_sweep(const CommonOptions& o, bool schemes_given) {
    auto cfg = load(o);
    if (schemes_given) {
        cfg.sweep_schemes = o.schemes;
    }
    if (cfg.sweep_schemes.empty()) {
        throw usage_error("the sweep has no schemes");
    }
    if (cfg.sweep_sensor_counts.empty() || cfg.sweep_targets.empty()) {
        throw usage_error("the sweep needs sensor counts and target probabilities");
    }
    for (const auto& s : cfg.sweep_schemes) {
        (void)lr::find_scheme(cfg, s);
    }
    std::ostringstream csv;
    lr::write_sweep_csv(csv, lr::run_sweep(cfg));
    emit(o.out, csv.str());
    return exit_ok;
}

int cmd_table(const CommonOptions& o, std::string meta_path) {
    const auto cfg = load(o);
    if (o.out.empty()) {
        throw usage_error("table needs --out");
    }
    if (meta_path.empty()) {
        meta_path = o.out + ".json";
    }
    const auto table = lr::build_lookup_table(cfg.scenario, cfg.constraints, cfg.target_failure_probability,
                                              cfg.table_grid, cfg.simulation.threads);
    std::ostringstream csv;
    lr::write_lookup_csv(csv, table);
    emit(o.out, csv.str());
    emit(meta_path, lr::lookup_metadata(table, cfg.document).dump(2) + "\n");
    for (const auto& e : table.entries) {
        if (e.failure) {
            std::cerr << "cell d=" << e.distance_m << " n=" << e.sensor_count << " m=" << e.nakagami_m
                      << " failed: " << *e.failure << '\n';
        }
    }
    return exit_ok;
}

void add_common(CLI::App* sub, CommonOptions& o, bool with_runs) {
    sub->add_option("--config", o.config_path, "Scenario JSON (merged over the defaults)")->check(CLI::ExistingFile);
    sub->add_option("--override", o.overrides, "Set a config key, e.g. simulation.duration_s=3600")
        ->type_name("KEY=VAL");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--out", o.out, "Output path (stdout when omitted)");
    sub->add_option("--scheme", o.schemes, "Scheme name(s)")->delimiter(',')->type_name("NAME[,NAME...]");
    if (with_runs) {
        sub->add_option("--runs", o.runs, "Runs per cell, or 'auto' for the MLR x frames >= 100 rule")
            ->type_name("N|auto");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Redundancy allocation and simulation for periodic LoRa sensor networks"};
    app.set_version_flag("--version", std::string(lr::library_version));
    app.require_subcommand(1);

    CommonOptions alloc_o;
    auto* alloc = app.add_subcommand("allocate", "Compute r_max, r*, r~ and the failure profile");
    add_common(alloc, alloc_o, false);

    CommonOptions sim_o;
    std::optional<int> redundancy;
    std::string events_path;
    auto* simc = app.add_subcommand("simulate", "Simulate one network configuration");
    add_common(simc, sim_o, true);
    simc->add_option("--redundancy", redundancy, "Fixed redundancy instead of a scheme")->check(CLI::NonNegativeNumber);
    simc->add_option("--events", events_path, "Write the frame log of the first run as CSV");

    CommonOptions sweep_o;
    auto* sweep = app.add_subcommand("sweep", "MLR and energy per measurement over n and schemes (CSV)");
    add_common(sweep, sweep_o, true);

    CommonOptions table_o;
    std::string meta_path;
    auto* table = app.add_subcommand("table", "Build the equal-distance redundancy lookup table");
    add_common(table, table_o, false);
    table->add_option("--meta", meta_path, "Metadata JSON path (default: <out>.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return e.get_exit_code() == 0 ? code : exit_usage;
    }

    try {
        if (*alloc) {
            return cmd_allocate(alloc_o);
        }
        if (*simc) {
            return cmd_simulate(sim_o, redundancy, events_path);
        }
        if (*sweep) {
            return cmd_sweep(sweep_o, sweep->count("--scheme") > 0);
        }
        if (*table) {
            return cmd_table(table_o, meta_path);
        }
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const lr::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const lr::invalid_parameter& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return exit_internal;
    }
    return exit_internal;
}
