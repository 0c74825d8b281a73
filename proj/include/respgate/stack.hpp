#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace respgate {

// Patient axes: x = left, y = posterior, z = superior.
using Vec3 = std::array<double, 3>;

struct StackError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One 2D+t slice: rows x cols x frames magnitude images plus acquisition
// geometry. Immutable after construction; validate() enforces the invariants.
struct SliceSeries {
    int rows = 0;
    int cols = 0;
    int frames = 0;
    // Frame-major, then row-major within each frame.
    std::vector<float> pixels;
    double frame_period_s = 0.0;
    Vec3 row_dir{};  // direction of increasing row index
    Vec3 col_dir{};  // direction of increasing column index
    std::vector<double> rwave_times_s;
    int slice_index = 0;

    float at(int r, int c, int n) const {
        return pixels[static_cast<std::size_t>(n) * rows * cols +
                      static_cast<std::size_t>(r) * cols + c];
    }
    float& at(int r, int c, int n) {
        return pixels[static_cast<std::size_t>(n) * rows * cols +
                      static_cast<std::size_t>(r) * cols + c];
    }

    void validate() const;
};

struct CineStack {
    std::vector<SliceSeries> slices;

    // Validates every slice and rejects mixed dimensions / frame periods.
    static CineStack create(std::vector<SliceSeries> slices);

    int rows() const { return slices.front().rows; }
    int cols() const { return slices.front().cols; }
    int frames() const { return slices.front().frames; }
    double frame_period_s() const { return slices.front().frame_period_s; }
    int slice_count() const { return static_cast<int>(slices.size()); }
};

enum class SignState { Raw, SliceConsistent, GloballyCorrected };

const char* to_string(SignState s);

// Unit-norm per-frame respiratory surrogate with an explicit sign-resolution
// state. State may only advance Raw -> SliceConsistent -> GloballyCorrected.
struct RespSignal {
    std::vector<double> values;
    SignState sign_state = SignState::Raw;
    int slice_index = 0;

    void validate() const;
};

// Projection of a slice's image series onto its respiratory singular vector.
struct EigenImage {
    std::vector<double> values;  // length rows*cols
    int slice_index = 0;
};

// Zeroth-moment-center trajectory, superior-positive units of pixels.
// Entries lie in [-L_v, 0) where L_v is the vertical axis length.
struct ZmcCurve {
    std::vector<double> values;
    int slice_index = 0;
};

struct HeartbeatWindow {
    int start_frame = 0;
    int end_frame = 0;  // inclusive
    double rr_s = 0.0;
};

// Ground truth for one generated phantom stack.
struct PhantomTruth {
    // Per slice: diaphragm SI displacement in pixels, superior-positive.
    std::vector<std::vector<double>> resp_signal;
    std::vector<std::vector<int>> pe_frames;  // local maxima of resp_signal
    std::vector<std::vector<int>> pi_frames;  // local minima
    std::vector<std::vector<double>> cardiac_phase;  // radians in [0, 2pi)
};

}  // namespace respgate
