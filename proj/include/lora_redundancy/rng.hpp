#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lora_redundancy {

using rng_engine = std::mt19937_64;

/// SplitMix64 finalizer; used to hash stream coordinates into seeds.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for the substream addressed by `coordinates` under `master`.
/// Streams for distinct coordinate tuples are decorrelated, so adding a
/// sensor or a run never perturbs the draws of an existing one.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master,
                                                  std::initializer_list<std::uint64_t> coordinates) noexcept {
    std::uint64_t h = mix64(master);
    for (std::uint64_t c : coordinates) {
        h = mix64(h ^ mix64(c + 0x632BE59BD9B4E019ULL));
    }
    return h;
}

enum class stream_purpose : std::uint64_t {
    placement = 1,
    phase = 2,
    channel = 3,
    fading = 4,
    run = 5,
};

[[nodiscard]] inline rng_engine make_stream(std::uint64_t master, stream_purpose purpose,
                                            std::uint64_t index) {
    return rng_engine{derive_seed(master, {static_cast<std::uint64_t>(purpose), index})};
}

} // namespace lora_redundancy
