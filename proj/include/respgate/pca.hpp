#pragma once

#include <vector>

#include "respgate/filter.hpp"
#include "respgate/stack.hpp"

namespace respgate {

struct PcaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// M x N matrix, columns = vectorized frames (row-major within each frame).
struct FlattenedSeries {
    int pixel_count = 0;  // M
    int frame_count = 0;  // N
    std::vector<double> data;  // column-major: data[n*M + m]

    double at(int m, int n) const {
        return data[static_cast<std::size_t>(n) * pixel_count + m];
    }
};

// Symmetric N x N matrix stored densely, row-major.
struct SymMatrix {
    int n = 0;
    std::vector<double> data;

    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * n + j]; }
    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * n + j]; }
    double trace() const;
};

FlattenedSeries flatten(const SliceSeries& slice);

// Subtracts each pixel's temporal mean.
FlattenedSeries center_temporal(const FlattenedSeries& d);

// Sigma(n,n') = column_n . column_n', no normalization.
SymMatrix covariance(const FlattenedSeries& centered);

struct EigenPair {
    std::vector<double> vector;  // unit norm
    double value = 0.0;
};

// Leading eigenpair of a symmetric PSD matrix. Deterministic power iteration
// from an all-ones start (orthogonalized restart if that direction is null),
// polished by Rayleigh-quotient iteration. Sign of the vector is unspecified.
EigenPair leading_eigenvector(const SymMatrix& sigma);

// D * v; negating v negates the result exactly.
EigenImage eigen_image(const FlattenedSeries& d, const std::vector<double>& v,
                       int slice_index = 0);

struct SliceExtraction {
    RespSignal signal;  // Raw state, canonicalized: largest-|entry| positive
    EigenImage image;
    double eigenvalue = 0.0;
};

// filter -> flatten -> center -> covariance -> leading eigenvector; the eigen
// image is computed from the filtered but uncentered matrix.
SliceExtraction extract_slice_signal(const SliceSeries& slice,
                                     const LowpassKernel& kernel);

// Same, for a slice that has already been low-pass filtered.
SliceExtraction extract_prefiltered(const SliceSeries& filtered_slice);

}  // namespace respgate
