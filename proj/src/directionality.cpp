#include "respgate/directionality.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>

#include "respgate/stack_io.hpp"

namespace respgate {

namespace {

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

std::vector<double> negated(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = -v[i];
    return out;
}

// Run fn(j) for j in [0, count) on up to `threads` workers. Exceptions are
// rethrown on the calling thread, lowest slice index first.
void parallel_slices(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (const char* env = std::getenv("RESPGATE_THREADS")) {
            const int cap = std::atoi(env);
            if (cap > 0) threads = cap;
        }
    }
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int j = 0; j < count; ++j) fn(j);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    int first_error_slice = count;
    auto worker = [&] {
        for (;;) {
            const int j = next.fetch_add(1);
            if (j >= count) return;
            try {
                fn(j);
            } catch (...) {
                std::lock_guard lock(err_mutex);
                if (j < first_error_slice) {
                    first_error_slice = j;
                    first_error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw DirectionalityError("pearson: length mismatch");
    const int k = static_cast<int>(a.size());
    if (k < 2) throw DirectionalityError("pearson: need at least 2 samples");
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < k; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= k;
    mb /= k;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (int i = 0; i < k; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw DirectionalityError("pearson: zero-variance input");
    return sab / std::sqrt(saa * sbb);
}

std::pair<std::vector<RespSignal>, SignLedger> propagate_signs(
    const std::vector<EigenImage>& eigen_images,
    const std::vector<RespSignal>& raw_signals) {
    const int j_count = static_cast<int>(raw_signals.size());
    if (j_count < 1) throw DirectionalityError("no slices");
    if (eigen_images.size() != raw_signals.size())
        throw DirectionalityError("eigen image / signal count mismatch");
    const std::size_t m = eigen_images.front().values.size();
    for (const auto& img : eigen_images)
        if (img.values.size() != m)
            throw DirectionalityError("slice " + std::to_string(img.slice_index) +
                                      ": eigen image length mismatch");

    SignLedger ledger;
    ledger.applied_flips.assign(j_count, false);
    std::vector<RespSignal> out;
    out.reserve(j_count);

    out.push_back(RespSignal{raw_signals[0].values, SignState::SliceConsistent,
                             raw_signals[0].slice_index});
    int chain_sign = 1;
    for (int j = 0; j + 1 < j_count; ++j) {
        const double r = pearson(eigen_images[j].values, eigen_images[j + 1].values);
        if (r == 0.0)
            throw DirectionalityError(
                "adjacent eigen images of slices " + std::to_string(j) + " and " +
                std::to_string(j + 1) + " are exactly uncorrelated");
        ledger.pairwise_r.push_back(r);
        chain_sign *= sign_of(r);
        const bool flip = chain_sign < 0;
        ledger.applied_flips[j + 1] = flip;
        out.push_back(RespSignal{
            flip ? negated(raw_signals[j + 1].values) : raw_signals[j + 1].values,
            SignState::SliceConsistent, raw_signals[j + 1].slice_index});
    }
    return {std::move(out), std::move(ledger)};
}

SiProjection si_projection(const SliceSeries& slice) {
    SiProjection p;
    p.rows = slice.rows;
    p.frames = slice.frames;
    p.data.assign(static_cast<std::size_t>(slice.rows) * slice.frames, 0.0);
    for (int n = 0; n < slice.frames; ++n)
        for (int r = 0; r < slice.rows; ++r) {
            double sum = 0.0;
            for (int c = 0; c < slice.cols; ++c) sum += slice.at(r, c, n);
            // filtering undershoot only; real mass is nonnegative
            p.data[static_cast<std::size_t>(n) * slice.rows + r] =
                sum < 0.0 ? 0.0 : sum;
        }
    return p;
}

ZmcCurve zmc_curve(const SiProjection& p, int slice_index) {
    ZmcCurve curve;
    curve.slice_index = slice_index;
    curve.values.resize(p.frames);
    for (int i = 0; i < p.frames; ++i) {
        double total = 0.0;
        for (int r = 0; r < p.rows; ++r) total += p.at(r, i);
        if (!(total > 0.0))
            throw DirectionalityError("frame " + std::to_string(i) +
                                      ": SI projection has no intensity");
        const double half = total / 2.0;
        double cum = 0.0;
        double prev_d = -half;  // d(0)
        double c = static_cast<double>(p.rows);
        for (int m = 1; m <= p.rows; ++m) {
            cum += p.at(m - 1, i);
            const double d = cum - half;
            if (d >= 0.0) {
                c = m - d / (d - prev_d);
                break;
            }
            prev_d = d;
        }
        curve.values[i] = -c;  // superior-positive
    }
    return curve;
}

std::pair<std::vector<RespSignal>, SignLedger> global_sign(
    const std::vector<RespSignal>& signals, const std::vector<ZmcCurve>& zmc,
    SignLedger ledger, double tau) {
    if (signals.size() != zmc.size())
        throw DirectionalityError("signal / ZMC count mismatch");
    const int j_count = static_cast<int>(signals.size());
    for (const auto& s : signals)
        if (s.sign_state != SignState::SliceConsistent)
            throw DirectionalityError("slice " + std::to_string(s.slice_index) +
                                      ": signal must be slice-consistent");

    ledger.zmc_s.assign(j_count, 0.0);
    ledger.excluded_slices.clear();
    double consensus = 0.0;
    for (int j = 0; j < j_count; ++j) {
        double s;
        try {
            s = pearson(signals[j].values, zmc[j].values);
        } catch (const DirectionalityError&) {
            ledger.excluded_slices.push_back(signals[j].slice_index);
            continue;
        }
        ledger.zmc_s[j] = s;
        consensus += sign_of(s) * std::max(std::abs(s) - tau, 0.0);
    }
    ledger.consensus_score = consensus;
    if (consensus == 0.0) throw UndeterminedDirectionality(std::move(ledger));

    const int g = sign_of(consensus);
    ledger.global_sign = g;
    std::vector<RespSignal> out;
    out.reserve(j_count);
    for (const auto& s : signals)
        out.push_back(RespSignal{g < 0 ? negated(s.values) : s.values,
                                 SignState::GloballyCorrected, s.slice_index});
    return {std::move(out), std::move(ledger)};
}

ResolveResult resolve_from(const std::vector<RespSignal>& raw_signals,
                           const std::vector<EigenImage>& eigen_images,
                           const std::vector<ZmcCurve>& zmc, double tau) {
    auto [consistent, ledger] = propagate_signs(eigen_images, raw_signals);
    auto [corrected, full_ledger] =
        global_sign(consistent, zmc, std::move(ledger), tau);
    ResolveResult out;
    out.signals = std::move(corrected);
    out.zmc = zmc;
    out.ledger = std::move(full_ledger);
    return out;
}

ResolveResult resolve(const CineStack& stack, const LowpassKernel& kernel,
                      const ResolveOptions& opts) {
    const int j_count = stack.slice_count();
    std::vector<RespSignal> raw(j_count);
    std::vector<EigenImage> images(j_count);
    std::vector<ZmcCurve> zmc(j_count);
    std::vector<double> eigenvalues(j_count);

    parallel_slices(j_count, opts.threads, [&](int j) {
        const SliceSeries& slice = stack.slices[j];
        const SliceSeries filtered = filter_slice(slice, kernel);
        SliceExtraction ex = extract_prefiltered(filtered);
        ex.signal.slice_index = slice.slice_index;
        ex.image.slice_index = slice.slice_index;
        raw[j] = std::move(ex.signal);
        images[j] = std::move(ex.image);
        eigenvalues[j] = ex.eigenvalue;

        const SliceSeries reoriented =
            reorient_to_si(opts.zmc_unfiltered ? slice : filtered);
        zmc[j] = zmc_curve(si_projection(reoriented), slice.slice_index);
    });

    ResolveResult out = resolve_from(raw, images, zmc, opts.tau);
    out.eigenvalues = std::move(eigenvalues);
    return out;
}

}  // namespace respgate
