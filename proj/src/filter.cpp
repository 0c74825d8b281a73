#include "respgate/filter.hpp"

#include <cmath>
#include <numbers>

namespace respgate {

namespace {

double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

}  // namespace

LowpassKernel design_lowpass(double fs_hz, double cutoff_hz) {
    if (fs_hz <= 0.0) throw FilterError("sampling rate must be positive");
    if (cutoff_hz <= 0.0 || cutoff_hz >= fs_hz / 2.0)
        throw FilterError("cutoff must lie strictly between 0 and Nyquist");

    int len = static_cast<int>(std::ceil(4.0 * fs_hz / cutoff_hz));
    if (len % 2 == 0) ++len;
    if (len < 5) len = 5;

    const int half = len / 2;
    const double fc = cutoff_hz / fs_hz;  // normalized cutoff
    std::vector<double> taps(len);
    double sum = 0.0;
    for (int n = 0; n < len; ++n) {
        const int k = n - half;
        const double w =
            0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (len - 1));
        taps[n] = 2.0 * fc * sinc(2.0 * fc * k) * w;
        sum += taps[n];
    }
    for (double& t : taps) t /= sum;
    // Force exact symmetry against rounding drift in the window evaluation.
    for (int n = 0; n < half; ++n) {
        const double avg = 0.5 * (taps[n] + taps[len - 1 - n]);
        taps[n] = avg;
        taps[len - 1 - n] = avg;
    }
    return LowpassKernel{std::move(taps), cutoff_hz, fs_hz};
}

std::complex<double> kernel_response(const LowpassKernel& kernel, double freq_hz) {
    const double w = 2.0 * std::numbers::pi * freq_hz / kernel.fs_hz;
    const int half = static_cast<int>(kernel.taps.size()) / 2;
    std::complex<double> h{0.0, 0.0};
    for (int n = 0; n < static_cast<int>(kernel.taps.size()); ++n)
        h += kernel.taps[n] * std::exp(std::complex<double>(0.0, -w * (n - half)));
    return h;
}

std::vector<double> apply_zero_phase(const std::vector<double>& series,
                                     const LowpassKernel& kernel) {
    const int n = static_cast<int>(series.size());
    const int len = static_cast<int>(kernel.taps.size());
    if (n < 3) throw FilterError("series too short to filter");
    if (len > 2 * n - 1)
        throw FilterError("kernel length " + std::to_string(len) +
                          " exceeds 2N-1 for N=" + std::to_string(n) +
                          "; reduce the filter order");
    const int half = len / 2;
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -half; k <= half; ++k) {
            int idx = i + k;
            // mirror without repeating the edge sample
            if (idx < 0) idx = -idx;
            if (idx >= n) idx = 2 * (n - 1) - idx;
            acc += kernel.taps[half + k] * series[idx];
        }
        out[i] = acc;
    }
    return out;
}

SliceSeries filter_slice(const SliceSeries& slice, const LowpassKernel& kernel) {
    SliceSeries out = slice;
    const int pixels_per_frame = slice.rows * slice.cols;
    std::vector<double> profile(slice.frames);
    for (int p = 0; p < pixels_per_frame; ++p) {
        for (int n = 0; n < slice.frames; ++n)
            profile[n] = slice.pixels[static_cast<std::size_t>(n) * pixels_per_frame + p];
        const std::vector<double> filtered = apply_zero_phase(profile, kernel);
        for (int n = 0; n < slice.frames; ++n)
            out.pixels[static_cast<std::size_t>(n) * pixels_per_frame + p] =
                static_cast<float>(filtered[n]);
    }
    return out;
}

}  // namespace respgate
