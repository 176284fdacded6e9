#pragma once

// Discrete-event Monte Carlo simulation of n periodic LoRa senders and one
// gateway at the origin.
//
// Every sensor transmits one frame per period at a fixed random phase. Each
// frame draws an independent channel and fading gain. A frame is lost to
// fading when its received power is below the sensitivity, and lost to
// interference when some time-overlapping frame on the same channel is not
// at least 1/capture_ratio weaker.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include "airtime.hpp"
#include "analysis.hpp"
#include "channel.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace lora_redundancy {

struct Position {
    double x_m = 0.0;
    double y_m = 0.0;

    [[nodiscard]] double distance() const { return std::hypot(x_m, y_m); }
};

struct Region {
    double x_min_m = 30.0;
    double x_max_m = 42.0;
    double y_min_m = 30.0;
    double y_max_m = 42.0;

    void validate() const {
        detail::require(x_min_m <= x_max_m && y_min_m <= y_max_m, "region bounds are inverted");
    }
};

struct SimConfig {
    /// Sensor count, radio, traffic, true fading, link and capture ratio.
    /// `scenario.distances` is ignored: distances follow from placement.
    ScenarioParams scenario{};
    Region region{};
    /// Fixed coordinates; overrides `region` when set.
    std::optional<std::vector<Position>> positions{};
    /// Fixed transmission phases in [0, period); random when unset.
    std::optional<std::vector<double>> phases_s{};
    int redundancy = 0;
    double duration_s = 10'800.0;
    std::uint64_t seed = 1;
    int runs = 1;
    std::vector<double> channel_frequencies_hz{860e6, 864e6, 868e6};
    /// Power drawn while transmitting; defaults to the radiated power.
    std::optional<double> energy_watts{};
    /// A later frame collides with an earlier one only if it starts more than
    /// this many symbols before the earlier frame ends. 0 means any overlap.
    int capture_lock_symbols = 3;
    /// Whether frames below sensitivity still interfere with others.
    bool subsensitivity_interference = true;
    /// With fading disabled every gain is exactly 1.
    bool fading_enabled = true;
    /// Retain the per-frame event log in each run.
    bool keep_events = false;
    unsigned threads = 0;

    [[nodiscard]] int channel_count() const { return static_cast<int>(channel_frequencies_hz.size()); }

    [[nodiscard]] double transmit_energy_watts() const {
        return energy_watts.value_or(scenario.link.transmit_power_w);
    }

    void validate() const {
        scenario.validate();
        region.validate();
        detail::require(redundancy >= 0, "redundancy must be non-negative");
        detail::require(duration_s >= scenario.traffic.period_s, "simulation must cover at least one period");
        detail::require(runs >= 1, "at least one run is required");
        detail::require(!channel_frequencies_hz.empty(), "at least one channel is required");
        detail::require(capture_lock_symbols >= 0, "lock symbol count must be non-negative");
        if (positions) {
            detail::require(static_cast<int>(positions->size()) == scenario.sensor_count,
                            "explicit positions must match the sensor count");
        }
        if (phases_s) {
            detail::require(static_cast<int>(phases_s->size()) == scenario.sensor_count,
                            "explicit phases must match the sensor count");
        }
    }
};

enum class frame_outcome { delivered, lost_fading, lost_interference };

[[nodiscard]] inline const char* to_string(frame_outcome o) {
    switch (o) {
    case frame_outcome::delivered: return "delivered";
    case frame_outcome::lost_fading: return "lost_fading";
    case frame_outcome::lost_interference: return "lost_interference";
    }
    return "unknown";
}

struct FrameEvent {
    int sender = 0;
    /// Sequence number of the frame within its sender's transmissions.
    int sequence = 0;
    double start_s = 0.0;
    double end_s = 0.0;
    int channel = 0;
    double received_power_w = 0.0;
    frame_outcome outcome = frame_outcome::delivered;
};

struct LossHistogram {
    std::size_t delivered = 0;
    std::size_t lost_fading = 0;
    std::size_t lost_interference = 0;

    [[nodiscard]] std::size_t total() const { return delivered + lost_fading + lost_interference; }
    [[nodiscard]] std::size_t lost() const { return lost_fading + lost_interference; }

    LossHistogram& operator+=(const LossHistogram& o) {
        delivered += o.delivered;
        lost_fading += o.lost_fading;
        lost_interference += o.lost_interference;
        return *this;
    }
};

struct SimRun {
    double frame_loss = 0.0;
    LossHistogram losses;
    std::vector<Position> positions;
    std::vector<FrameEvent> events;
    /// Direct measurement-loss count, tracked even when events are dropped.
    std::size_t measurements = 0;
    std::size_t measurements_lost = 0;
};

struct SimReport {
    int redundancy = 0;
    std::vector<double> frame_loss;
    double mean_frame_loss = 0.0;
    double mlr = 0.0;
    double mlr_direct = 0.0;
    double e_m_mj = 0.0;
    LossHistogram losses;
    std::size_t frames_sent = 0;
    bool runs_rule_satisfied = false;
    std::vector<SimRun> runs;
};

[[nodiscard]] inline std::uint64_t run_seed(std::uint64_t master, int run_index) {
    return derive_seed(master, {static_cast<std::uint64_t>(stream_purpose::run),
                                static_cast<std::uint64_t>(run_index)});
}

/// Uniform placement in the configured region (or the explicit positions).
[[nodiscard]] inline std::vector<Position> place_sensors(const SimConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    if (cfg.positions) {
        return *cfg.positions;
    }
    std::vector<Position> out;
    out.reserve(static_cast<std::size_t>(cfg.scenario.sensor_count));
    for (int i = 0; i < cfg.scenario.sensor_count; ++i) {
        auto rng = make_stream(seed, stream_purpose::placement, static_cast<std::uint64_t>(i));
        std::uniform_real_distribution<double> ux(cfg.region.x_min_m, cfg.region.x_max_m);
        std::uniform_real_distribution<double> uy(cfg.region.y_min_m, cfg.region.y_max_m);
        Position p;
        p.x_m = cfg.region.x_min_m == cfg.region.x_max_m ? cfg.region.x_min_m : ux(rng);
        p.y_m = cfg.region.y_min_m == cfg.region.y_max_m ? cfg.region.y_min_m : uy(rng);
        out.push_back(p);
    }
    return out;
}

namespace detail {

/// Measurements whose every carrying frame was lost. Measurement k of a
/// sensor rides on frames k..k+r; only measurements with all r + 1 frames
/// inside the log are counted. `events` must be grouped by sender and
/// ordered by sequence.
inline std::pair<std::size_t, std::size_t> count_lost_measurements(const std::vector<FrameEvent>& events,
                                                                   int redundancy) {
    std::size_t measurements = 0;
    std::size_t lost = 0;
    std::size_t begin = 0;
    while (begin < events.size()) {
        std::size_t end = begin;
        while (end < events.size() && events[end].sender == events[begin].sender) {
            ++end;
        }
        const std::size_t frames = end - begin;
        const auto span = static_cast<std::size_t>(redundancy) + 1;
        // Sliding count of lost frames in the window [k, k + r].
        std::size_t lost_in_window = 0;
        for (std::size_t k = 0; k < frames; ++k) {
            if (events[begin + k].outcome != frame_outcome::delivered) {
                ++lost_in_window;
            }
            if (k >= span && events[begin + k - span].outcome != frame_outcome::delivered) {
                --lost_in_window;
            }
            if (k + 1 >= span) {
                ++measurements;
                if (lost_in_window == span) {
                    ++lost;
                }
            }
        }
        begin = end;
    }
    return {measurements, lost};
}

} // namespace detail

/// One simulation run. `run_index` selects the run's random streams.
[[nodiscard]] inline SimRun run(const SimConfig& cfg, int run_index) {
    cfg.validate();
    const auto& sc = cfg.scenario;
    const std::uint64_t seed = run_seed(cfg.seed, run_index);
    const double period = sc.traffic.period_s;
    const double frame_s = frame_duration(sc.radio, frame_payload_bytes(sc.traffic, cfg.redundancy));
    const double lock_s = cfg.capture_lock_symbols * symbol_duration(sc.radio);
    const double gamma = gamma_constant(sc.link);
    const double sensitivity = sc.link.sensitivity_w;
    const int channels = cfg.channel_count();

    SimRun out;
    out.positions = place_sensors(cfg, seed);

    std::vector<FrameEvent> frames;
    frames.reserve(static_cast<std::size_t>(sc.sensor_count) *
                   static_cast<std::size_t>(cfg.duration_s / period + 1.0));
    for (int i = 0; i < sc.sensor_count; ++i) {
        const auto idx = static_cast<std::uint64_t>(i);
        double phase = 0.0;
        if (cfg.phases_s) {
            phase = (*cfg.phases_s)[static_cast<std::size_t>(i)];
        } else {
            auto phase_rng = make_stream(seed, stream_purpose::phase, idx);
            phase = std::uniform_real_distribution<double>(0.0, period)(phase_rng);
        }
        auto channel_rng = make_stream(seed, stream_purpose::channel, idx);
        auto fading_rng = make_stream(seed, stream_purpose::fading, idx);
        std::uniform_int_distribution<int> pick_channel(0, channels - 1);
        const double mean_power = gamma * std::pow(out.positions[idx].distance(), -sc.link.pathloss_exponent);
        int seq = 0;
        for (double start = phase; start < cfg.duration_s; start = phase + period * ++seq) {
            FrameEvent f;
            f.sender = i;
            f.sequence = seq;
            f.start_s = start;
            f.end_s = start + frame_s;
            f.channel = pick_channel(channel_rng);
            const double gain = cfg.fading_enabled ? sc.fading.sample(fading_rng) : 1.0;
            f.received_power_w = gain * mean_power;
            f.outcome = f.received_power_w < sensitivity ? frame_outcome::lost_fading : frame_outcome::delivered;
            frames.push_back(f);
        }
    }
    if (frames.empty()) {
        throw no_traffic("simulation produced no frames");
    }

    std::vector<std::size_t> order(frames.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return frames[a].start_s != frames[b].start_s ? frames[a].start_s < frames[b].start_s
                                                      : frames[a].sender < frames[b].sender;
    });

    std::vector<bool> jammed(frames.size(), false);
    const double delta = sc.capture_ratio;
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const FrameEvent& early = frames[order[oi]];
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const FrameEvent& late = frames[order[oj]];
            // Half-open intervals; all frames in a run share one duration.
            if (!(late.start_s + lock_s < early.end_s)) {
                break;
            }
            if (late.channel != early.channel) {
                continue;
            }
            const bool early_active = cfg.subsensitivity_interference || early.outcome != frame_outcome::lost_fading;
            const bool late_active = cfg.subsensitivity_interference || late.outcome != frame_outcome::lost_fading;
            if (late_active && late.received_power_w > delta * early.received_power_w) {
                jammed[order[oi]] = true;
            }
            if (early_active && early.received_power_w > delta * late.received_power_w) {
                jammed[order[oj]] = true;
            }
        }
    }

    for (std::size_t k = 0; k < frames.size(); ++k) {
        auto& f = frames[k];
        if (f.outcome == frame_outcome::delivered && jammed[k]) {
            f.outcome = frame_outcome::lost_interference;
        }
        switch (f.outcome) {
        case frame_outcome::delivered: ++out.losses.delivered; break;
        case frame_outcome::lost_fading: ++out.losses.lost_fading; break;
        case frame_outcome::lost_interference: ++out.losses.lost_interference; break;
        }
    }
    out.frame_loss = static_cast<double>(out.losses.lost()) / static_cast<double>(out.losses.total());
    const auto [measurements, lost] = detail::count_lost_measurements(frames, cfg.redundancy);
    out.measurements = measurements;
    out.measurements_lost = lost;
    if (cfg.keep_events) {
        out.events = std::move(frames);
    }
    return out;
}

/// The exponentiation estimator: (mean frame loss)^(r + 1).
[[nodiscard]] inline double estimate_mlr(const std::vector<double>& frame_loss, int redundancy) {
    detail::require(!frame_loss.empty(), "at least one run is required");
    const double mean = std::accumulate(frame_loss.begin(), frame_loss.end(), 0.0) /
                        static_cast<double>(frame_loss.size());
    return std::pow(mean, redundancy + 1);
}

/// Runs needed so that MLR times the number of simulated frames reaches 100.
[[nodiscard]] inline int required_runs_for_mlr(double mlr, double frames_per_run) {
    if (!(mlr > 0.0)) {
        throw not_estimable("zero measurement loss: the 100-event rule cannot be satisfied");
    }
    detail::require(frames_per_run > 0.0, "frames per run must be positive");
    const double runs = std::ceil(100.0 / (mlr * frames_per_run) - 1e-9);
    return static_cast<int>(std::max(1.0, std::min(runs, 2e9)));
}

[[nodiscard]] inline int required_runs(double mean_frame_loss, int redundancy, double frames_per_run) {
    return required_runs_for_mlr(std::pow(mean_frame_loss, redundancy + 1), frames_per_run);
}

/// Fraction of measurements none of whose r + 1 frames was delivered.
[[nodiscard]] inline double direct_mlr(const std::vector<FrameEvent>& events, int redundancy) {
    std::vector<FrameEvent> sorted = events;
    std::stable_sort(sorted.begin(), sorted.end(), [](const FrameEvent& a, const FrameEvent& b) {
        return a.sender != b.sender ? a.sender < b.sender : a.sequence < b.sequence;
    });
    const auto [measurements, lost] = detail::count_lost_measurements(sorted, redundancy);
    return measurements == 0 ? 0.0 : static_cast<double>(lost) / static_cast<double>(measurements);
}

/// Transmit energy per delivered measurement in millijoules.
[[nodiscard]] inline double energy_per_delivered(const SimConfig& cfg, double mlr) {
    detail::require(mlr >= 0.0 && mlr < 1.0, "MLR must lie in [0, 1)");
    const auto& sc = cfg.scenario;
    return frame_energy_mj(sc.radio, frame_payload_bytes(sc.traffic, cfg.redundancy), cfg.transmit_energy_watts()) /
           (1.0 - mlr);
}

/// Executes runs [first, last) in parallel; results are indexed by run.
[[nodiscard]] inline std::vector<SimRun> run_batch(const SimConfig& cfg, int first, int last) {
    std::vector<SimRun> results(static_cast<std::size_t>(std::max(0, last - first)));
    unsigned workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(results.size()));
    std::atomic<int> next{first};
    auto work = [&] {
        for (int k = next++; k < last; k = next++) {
            results[static_cast<std::size_t>(k - first)] = run(cfg, k);
        }
    };
    if (workers <= 1) {
        work();
        return results;
    }
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back(work);
    }
    pool.clear();
    return results;
}

namespace detail {

inline void summarize(SimReport& report, const SimConfig& cfg) {
    report.redundancy = cfg.redundancy;
    report.frame_loss.clear();
    report.losses = {};
    std::size_t measurements = 0;
    std::size_t lost = 0;
    for (const auto& r : report.runs) {
        report.frame_loss.push_back(r.frame_loss);
        report.losses += r.losses;
        measurements += r.measurements;
        lost += r.measurements_lost;
    }
    report.frames_sent = report.losses.total();
    report.mean_frame_loss = std::accumulate(report.frame_loss.begin(), report.frame_loss.end(), 0.0) /
                             static_cast<double>(report.frame_loss.size());
    report.mlr = estimate_mlr(report.frame_loss, cfg.redundancy);
    report.mlr_direct = measurements == 0 ? 0.0 : static_cast<double>(lost) / static_cast<double>(measurements);
    report.e_m_mj = report.mlr < 1.0 ? energy_per_delivered(cfg, report.mlr) : std::numeric_limits<double>::infinity();
    report.runs_rule_satisfied = report.mlr * static_cast<double>(report.frames_sent) >= 100.0;
}

} // namespace detail

/// Runs `cfg.runs` independent runs and aggregates them.
[[nodiscard]] inline SimReport simulate(const SimConfig& cfg) {
    cfg.validate();
    SimReport report;
    report.runs = run_batch(cfg, 0, cfg.runs);
    detail::summarize(report, cfg);
    return report;
}

/// Adds runs until MLR x simulated frames >= 100, or `max_runs` is reached.
[[nodiscard]] inline SimReport simulate_until_reliable(const SimConfig& cfg, int min_runs, int max_runs) {
    cfg.validate();
    detail::require(min_runs >= 1 && max_runs >= min_runs, "invalid run bounds");
    SimReport report;
    report.runs = run_batch(cfg, 0, min_runs);
    detail::summarize(report, cfg);
    while (static_cast<int>(report.runs.size()) < max_runs) {
        const double frames_per_run =
            static_cast<double>(report.frames_sent) / static_cast<double>(report.runs.size());
        int needed = max_runs;
        if (report.mean_frame_loss > 0.0) {
            needed = std::min(max_runs, required_runs(report.mean_frame_loss, cfg.redundancy, frames_per_run));
        }
        const int have = static_cast<int>(report.runs.size());
        if (needed <= have) {
            break;
        }
        auto more = run_batch(cfg, have, needed);
        std::move(more.begin(), more.end(), std::back_inserter(report.runs));
        detail::summarize(report, cfg);
    }
    return report;
}

} // namespace lora_redundancy
