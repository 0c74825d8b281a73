#pragma once

#include <vector>

#include "respgate/stack.hpp"

namespace respgate {

struct HeartbeatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One window per adjacent R-wave pair [t_k, t_{k+1}); a frame belongs to the
// window whose interval contains its center time. Windows with no frames are
// dropped.
std::vector<HeartbeatWindow> segment_heartbeats(
    const std::vector<double>& rwave_times_s, double frame_period_s, int frames);

// Keeps windows whose RR deviates from the mean RR (over all inputs) by at
// most `tolerance` relative.
std::vector<HeartbeatWindow> reject_arrhythmic(
    const std::vector<HeartbeatWindow>& windows, double tolerance = 0.15);

enum class BeatScore { MeanSignal, FirstFrame };

struct PePiSelection {
    HeartbeatWindow pe;
    HeartbeatWindow pi;
    std::vector<double> scores;  // per input window
    bool degenerate = false;     // single window served both roles
};

// Scores each window on the resolved signal (maxima = peak expiration) and
// picks the extremes; ties go to the earlier window.
PePiSelection select_pe_pi(const std::vector<HeartbeatWindow>& windows,
                           const RespSignal& signal,
                           BeatScore score = BeatScore::MeanSignal);

}  // namespace respgate
