#pragma once

#include <complex>
#include <vector>

#include "respgate/stack.hpp"

namespace respgate {

struct FilterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Symmetric odd-length FIR with unit DC gain.
struct LowpassKernel {
    std::vector<double> taps;
    double cutoff_hz = 0.0;
    double fs_hz = 0.0;
};

// Hamming-windowed sinc, length = smallest odd count >= 4*fs/cutoff.
// Throws FilterError if cutoff is at or above Nyquist.
LowpassKernel design_lowpass(double fs_hz, double cutoff_hz = 0.8);

// Frequency response H(f) of the kernel, evaluated directly.
std::complex<double> kernel_response(const LowpassKernel& kernel, double freq_hz);

// Zero-phase filtering: linear convolution with the centred symmetric kernel,
// mirror padding at both ends (edge sample not repeated). Output length == input.
std::vector<double> apply_zero_phase(const std::vector<double>& series,
                                     const LowpassKernel& kernel);

// Filters every pixel's temporal profile; geometry metadata unchanged.
SliceSeries filter_slice(const SliceSeries& slice, const LowpassKernel& kernel);

}  // namespace respgate
