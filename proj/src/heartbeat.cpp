#include "respgate/heartbeat.hpp"

#include <cmath>
#include <limits>

namespace respgate {

std::vector<HeartbeatWindow> segment_heartbeats(
    const std::vector<double>& rwave_times_s, double frame_period_s, int frames) {
    if (rwave_times_s.size() < 2)
        throw HeartbeatError("insufficient triggers: need at least 2 R-waves");
    std::vector<HeartbeatWindow> out;
    for (std::size_t k = 0; k + 1 < rwave_times_s.size(); ++k) {
        const double t0 = rwave_times_s[k];
        const double t1 = rwave_times_s[k + 1];
        if (t1 <= t0) throw HeartbeatError("R-wave times must be increasing");
        int first = -1, last = -1;
        for (int f = 0; f < frames; ++f) {
            const double center = (f + 0.5) * frame_period_s;
            if (center >= t0 && center < t1) {
                if (first < 0) first = f;
                last = f;
            }
        }
        if (first < 0) continue;  // beat fell between frame centers
        out.push_back(HeartbeatWindow{first, last, t1 - t0});
    }
    return out;
}

std::vector<HeartbeatWindow> reject_arrhythmic(
    const std::vector<HeartbeatWindow>& windows, double tolerance) {
    if (windows.empty()) throw HeartbeatError("no heartbeat windows");
    double mean_rr = 0.0;
    for (const auto& w : windows) mean_rr += w.rr_s;
    mean_rr /= static_cast<double>(windows.size());
    std::vector<HeartbeatWindow> kept;
    for (const auto& w : windows)
        if (std::abs(w.rr_s - mean_rr) / mean_rr <= tolerance) kept.push_back(w);
    if (kept.empty()) throw HeartbeatError("no sinus beats within RR tolerance");
    return kept;
}

PePiSelection select_pe_pi(const std::vector<HeartbeatWindow>& windows,
                           const RespSignal& signal, BeatScore score) {
    if (signal.sign_state != SignState::GloballyCorrected)
        throw HeartbeatError("signal must be globally corrected");
    if (windows.empty()) throw HeartbeatError("no heartbeat windows");

    PePiSelection sel;
    sel.scores.reserve(windows.size());
    for (const auto& w : windows) {
        double s;
        if (score == BeatScore::FirstFrame) {
            s = signal.values[w.start_frame];
        } else {
            s = 0.0;
            for (int f = w.start_frame; f <= w.end_frame; ++f)
                s += signal.values[f];
            s /= (w.end_frame - w.start_frame + 1);
        }
        sel.scores.push_back(s);
    }
    std::size_t pe = 0, pi = 0;
    for (std::size_t k = 1; k < windows.size(); ++k) {
        if (sel.scores[k] > sel.scores[pe]) pe = k;
        if (sel.scores[k] < sel.scores[pi]) pi = k;
    }
    sel.pe = windows[pe];
    sel.pi = windows[pi];
    sel.degenerate = windows.size() == 1;
    return sel;
}

}  // namespace respgate
