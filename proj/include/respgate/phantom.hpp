#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "respgate/stack.hpp"

namespace respgate {

struct PhantomError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class RespPattern { Periodic, LongCycle, Irregular, WithDrift };
enum class OrientationScenario { Aligned, Transposed, Flipped, Oblique };

RespPattern resp_pattern_from_string(const std::string& s);
OrientationScenario orientation_from_string(const std::string& s);
const char* to_string(RespPattern p);
const char* to_string(OrientationScenario o);

struct PhantomConfig {
    int slices = 10;
    int rows = 64;  // vertical extent of the rendered plane
    int cols = 64;
    int frames = 250;
    double frame_period_s = 0.04;
    RespPattern resp_pattern = RespPattern::Periodic;
    double resp_period_s = 4.0;
    double resp_amp_px = 6.0;
    double cardiac_rate_hz = 1.25;
    double cardiac_amp_px = 3.0;
    // Starting respiratory phase per slice; filled from the seed when empty.
    std::vector<double> phase_offsets;
    double noise_sigma = 0.01;
    OrientationScenario orientation = OrientationScenario::Aligned;
    std::uint64_t seed = 1;

    void validate() const;
};

struct PhantomResult {
    CineStack stack;
    PhantomTruth truth;
};

// Renders a stack of slices, each with a diaphragm/liver edge translating
// with the per-slice respiratory waveform (sub-pixel via a sigmoid edge), a
// pulsating heart disc, static background and seeded noise. R-waves are
// placed at cardiac phase zero. Bit-reproducible for a given config.
PhantomResult generate(const PhantomConfig& config);

// Splits into `parts` frame-contiguous stacks of near-equal length with
// R-wave times shifted into each part's clock.
std::vector<CineStack> split_series(const CineStack& stack, int parts = 2);

// The matching split of a truth record.
std::vector<PhantomTruth> split_truth(const PhantomTruth& truth, int frames,
                                      int parts = 2);

void save_truth(const PhantomTruth& truth, const std::filesystem::path& path);
PhantomTruth load_truth(const std::filesystem::path& path);

// SplitMix64: portable 64-bit PRNG with cheap per-slice stream derivation.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform() {  // [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }
    double gaussian();
};

}  // namespace respgate
