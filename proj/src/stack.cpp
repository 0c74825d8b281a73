#include "respgate/stack.hpp"

#include <cmath>
#include <cstdlib>

namespace respgate {

namespace {

double norm3(const Vec3& v) {
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

double dot3(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace

void SliceSeries::validate() const {
    const std::string tag = "slice " + std::to_string(slice_index) + ": ";
    if (rows < 2 || cols < 2) throw StackError(tag + "image must be at least 2x2");
    if (frames < 3) throw StackError(tag + "need at least 3 frames");
    if (frame_period_s <= 0.0) throw StackError(tag + "frame period must be positive");
    const std::size_t expected =
        static_cast<std::size_t>(rows) * cols * frames;
    if (pixels.size() != expected)
        throw StackError(tag + "pixel count " + std::to_string(pixels.size()) +
                         " does not match " + std::to_string(expected));
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const float v = pixels[i];
        if (!std::isfinite(v) || v < 0.0f) {
            const int frame = static_cast<int>(i / (static_cast<std::size_t>(rows) * cols));
            throw StackError(tag + "non-finite or negative intensity at frame " +
                             std::to_string(frame));
        }
    }
    if (std::abs(norm3(row_dir) - 1.0) > 1e-6 || std::abs(norm3(col_dir) - 1.0) > 1e-6)
        throw StackError(tag + "direction cosines must be unit vectors");
    if (std::abs(dot3(row_dir, col_dir)) >= 1e-3)
        throw StackError(tag + "row and column axes must be orthogonal");
    const double t_max = frames * frame_period_s;
    double prev = -1.0;
    for (double t : rwave_times_s) {
        if (t < 0.0 || t > t_max)
            throw StackError(tag + "R-wave time outside the series");
        if (t <= prev) throw StackError(tag + "R-wave times must be strictly increasing");
        prev = t;
    }
}

CineStack CineStack::create(std::vector<SliceSeries> slices) {
    if (slices.empty()) throw StackError("stack must contain at least one slice");
    for (const auto& s : slices) s.validate();
    const auto& first = slices.front();
    for (const auto& s : slices) {
        if (s.rows != first.rows || s.cols != first.cols || s.frames != first.frames)
            throw StackError("slice " + std::to_string(s.slice_index) +
                             ": dimension mismatch within stack");
        if (s.frame_period_s != first.frame_period_s)
            throw StackError("slice " + std::to_string(s.slice_index) +
                             ": frame period mismatch within stack");
    }
    CineStack stack;
    stack.slices = std::move(slices);
    return stack;
}

const char* to_string(SignState s) {
    switch (s) {
        case SignState::Raw: return "raw";
        case SignState::SliceConsistent: return "slice-consistent";
        case SignState::GloballyCorrected: return "globally-corrected";
    }
    return "?";
}

void RespSignal::validate() const {
    double ss = 0.0;
    for (double v : values) ss += v * v;
    if (std::abs(std::sqrt(ss) - 1.0) > 1e-9)
        throw StackError("respiratory signal must have unit norm");
}

}  // namespace respgate
