#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "respgate/stack.hpp"

namespace respgate {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kManifestName = "stack.json";
inline constexpr const char* kManifestVersion = "1";

// Reads stack.json plus the referenced raw little-endian float32 pixel files
// (frame-major, row-major within each frame) and returns a validated stack.
CineStack load_stack(const std::filesystem::path& dir);

// Writes stack.json and one slice_<k>.raw per slice.
void save_stack(const CineStack& stack, const std::filesystem::path& dir);

// Returns a slice whose row axis carries the dominant superior-inferior
// component with row index increasing toward inferior, obtained by
// transposing and/or flipping the pixel array and updating the direction
// cosines. Idempotent; never resamples.
SliceSeries reorient_to_si(const SliceSeries& slice);

// Writes signals.csv, zmc.csv and summary.json. All signals must be in the
// GloballyCorrected state.
void save_signals(const std::filesystem::path& dir,
                  const std::vector<RespSignal>& signals,
                  const std::vector<ZmcCurve>& zmc,
                  const std::string& summary_json);

// Reads signals.csv back: one column per slice, one row per frame.
std::vector<std::vector<double>> load_signal_columns(
    const std::filesystem::path& csv_path);

}  // namespace respgate
