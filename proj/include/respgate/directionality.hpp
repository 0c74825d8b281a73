#pragma once

#include <vector>

#include "respgate/filter.hpp"
#include "respgate/pca.hpp"
#include "respgate/stack.hpp"

namespace respgate {

struct DirectionalityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Record of every sign decision made while resolving a stack.
struct SignLedger {
    std::vector<double> pairwise_r;   // r_{j,j+1}, length J-1
    std::vector<double> zmc_s;        // s_j, length J
    std::vector<bool> applied_flips;  // per slice, step-1 flips (slice 0 never)
    int global_sign = 0;              // +1 / -1, 0 while undetermined
    double consensus_score = 0.0;
    std::vector<int> excluded_slices;  // zero-variance ZMC curves skipped in step 2
};

// Raised when the weighted ZMC consensus is exactly zero; carries the ledger
// so the caller can report what was measured.
struct UndeterminedDirectionality : DirectionalityError {
    SignLedger ledger;
    explicit UndeterminedDirectionality(SignLedger l)
        : DirectionalityError("directionality undetermined: all ZMC correlations "
                              "below threshold or cancelling"),
          ledger(std::move(l)) {}
};

// Pearson correlation coefficient. Throws on zero-variance input.
double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Step 1: make every slice's sign consistent with slice 0 through the chain
// of adjacent eigen-image correlations. A correlation of exactly zero is an
// error, not a guess.
std::pair<std::vector<RespSignal>, SignLedger> propagate_signs(
    const std::vector<EigenImage>& eigen_images,
    const std::vector<RespSignal>& raw_signals);

// Per-frame vertical intensity profile of an SI-reoriented slice: row sums
// across the horizontal axis. Negative filtering undershoot is clamped to 0.
// Returned column-major: profile[frame * rows + row].
struct SiProjection {
    int rows = 0;
    int frames = 0;
    std::vector<double> data;
    double at(int row, int frame) const {
        return data[static_cast<std::size_t>(frame) * rows + row];
    }
};
SiProjection si_projection(const SliceSeries& reoriented_slice);

// Intensity-median center of each projection column, stored negated so that
// larger values are more superior.
ZmcCurve zmc_curve(const SiProjection& p, int slice_index = 0);

// Step 2: global sign from the threshold-weighted consensus of per-slice
// correlations between the signals and their ZMC curves.
std::pair<std::vector<RespSignal>, SignLedger> global_sign(
    const std::vector<RespSignal>& signals, const std::vector<ZmcCurve>& zmc,
    SignLedger ledger, double tau = 0.7);

struct ResolveOptions {
    double cutoff_hz = 0.8;
    double tau = 0.7;
    bool zmc_unfiltered = false;  // compute ZMC on the raw series
    int threads = 0;              // 0 = hardware concurrency
};

struct ResolveResult {
    std::vector<RespSignal> signals;  // GloballyCorrected
    std::vector<ZmcCurve> zmc;
    SignLedger ledger;
    std::vector<double> eigenvalues;
};

// Full pipeline over already-extracted per-slice results. Exposed separately
// so sign-flip experiments can inject modified raw signals.
ResolveResult resolve_from(const std::vector<RespSignal>& raw_signals,
                           const std::vector<EigenImage>& eigen_images,
                           const std::vector<ZmcCurve>& zmc, double tau = 0.7);

// Extraction + step 1 + ZMC + step 2 for a whole stack.
ResolveResult resolve(const CineStack& stack, const LowpassKernel& kernel,
                      const ResolveOptions& opts = {});

}  // namespace respgate
