#include "respgate/pca.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace respgate {

namespace {

double dot(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const std::vector<double>& v) {
    return std::sqrt(dot(v.data(), v.data(), static_cast<int>(v.size())));
}

void matvec(const SymMatrix& a, const std::vector<double>& x, std::vector<double>& y) {
    const int n = a.n;
    for (int i = 0; i < n; ++i) {
        y[i] = dot(&a.data[static_cast<std::size_t>(i) * n], x.data(), n);
    }
}

// Solve (A - mu*I) x = b by Gaussian elimination with partial pivoting.
// Used for Rayleigh-quotient polishing; a nearly singular system is expected
// and harmless, only the direction of x matters.
bool solve_shifted(const SymMatrix& a, double mu, const std::vector<double>& b,
                   std::vector<double>& x) {
    const int n = a.n;
    std::vector<double> m(a.data);
    for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i) * n + i] -= mu;
    x = b;
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(m[static_cast<std::size_t>(k) * n + k]);
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(m[static_cast<std::size_t>(i) * n + k]);
            if (v > best) { best = v; p = i; }
        }
        if (best == 0.0) return false;
        if (p != k) {
            for (int j = 0; j < n; ++j)
                std::swap(m[static_cast<std::size_t>(k) * n + j],
                          m[static_cast<std::size_t>(p) * n + j]);
            std::swap(x[k], x[p]);
        }
        const double pivval = m[static_cast<std::size_t>(k) * n + k];
        for (int i = k + 1; i < n; ++i) {
            const double f = m[static_cast<std::size_t>(i) * n + k] / pivval;
            if (f == 0.0) continue;
            for (int j = k + 1; j < n; ++j)
                m[static_cast<std::size_t>(i) * n + j] -=
                    f * m[static_cast<std::size_t>(k) * n + j];
            x[i] -= f * x[k];
        }
    }
    for (int k = n - 1; k >= 0; --k) {
        double acc = x[k];
        for (int j = k + 1; j < n; ++j)
            acc -= m[static_cast<std::size_t>(k) * n + j] * x[j];
        x[k] = acc / m[static_cast<std::size_t>(k) * n + k];
    }
    return true;
}

}  // namespace

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += at(i, i);
    return t;
}

FlattenedSeries flatten(const SliceSeries& slice) {
    FlattenedSeries d;
    d.pixel_count = slice.rows * slice.cols;
    d.frame_count = slice.frames;
    d.data.resize(static_cast<std::size_t>(d.pixel_count) * d.frame_count);
    // pixels are already frame-major with row-major frames, so each frame is
    // a contiguous run that becomes one column
    for (std::size_t i = 0; i < d.data.size(); ++i)
        d.data[i] = static_cast<double>(slice.pixels[i]);
    return d;
}

FlattenedSeries center_temporal(const FlattenedSeries& d) {
    FlattenedSeries out = d;
    const int m_count = d.pixel_count;
    const int n_count = d.frame_count;
    for (int m = 0; m < m_count; ++m) {
        double mean = 0.0;
        for (int n = 0; n < n_count; ++n) mean += d.at(m, n);
        mean /= n_count;
        for (int n = 0; n < n_count; ++n)
            out.data[static_cast<std::size_t>(n) * m_count + m] -= mean;
    }
    return out;
}

SymMatrix covariance(const FlattenedSeries& centered) {
    const int m_count = centered.pixel_count;
    const int n_count = centered.frame_count;
    SymMatrix sigma;
    sigma.n = n_count;
    sigma.data.assign(static_cast<std::size_t>(n_count) * n_count, 0.0);
    for (int i = 0; i < n_count; ++i) {
        const double* ci = &centered.data[static_cast<std::size_t>(i) * m_count];
        for (int j = i; j < n_count; ++j) {
            const double* cj = &centered.data[static_cast<std::size_t>(j) * m_count];
            const double v = dot(ci, cj, m_count);
            sigma.at(i, j) = v;
            sigma.at(j, i) = v;
        }
    }
    return sigma;
}

EigenPair leading_eigenvector(const SymMatrix& sigma) {
    const int n = sigma.n;
    if (n < 1) throw PcaError("empty matrix");
    double max_asym = 0.0;
    double max_abs = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            max_asym = std::max(max_asym, std::abs(sigma.at(i, j) - sigma.at(j, i)));
            max_abs = std::max(max_abs, std::abs(sigma.at(i, j)));
        }
    for (int i = 0; i < n; ++i) max_abs = std::max(max_abs, std::abs(sigma.at(i, i)));
    if (max_abs > 0.0 && max_asym > 1e-8 * max_abs)
        throw PcaError("matrix is not symmetric");

    const double scale = std::max(sigma.trace() / n, 0.0);

    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> w(n);
    double lambda = 0.0;

    // start vectors: all-ones, then unit basis vectors as fallback when the
    // current start lies in the null space
    int restart = 0;
    const int max_iter = 10000;
    for (int it = 0; it < max_iter; ++it) {
        matvec(sigma, v, w);
        const double wn = norm2(w);
        if (wn <= 1e-300 || wn < 1e-14 * std::max(scale, 1e-300)) {
            if (restart < n) {
                std::fill(v.begin(), v.end(), 0.0);
                v[restart++] = 1.0;
                continue;
            }
            // zero matrix: any unit vector is an eigenvector for lambda 0
            std::fill(v.begin(), v.end(), 0.0);
            v[0] = 1.0;
            return EigenPair{std::move(v), 0.0};
        }
        const double new_lambda = dot(v.data(), w.data(), n);
        for (int i = 0; i < n; ++i) v[i] = w[i] / wn;
        const bool settled =
            std::abs(new_lambda - lambda) <= 1e-13 * std::max(std::abs(new_lambda), scale);
        lambda = new_lambda;
        if (settled && it > 2) break;
    }

    // Rayleigh-quotient polish: converges cubically onto the dominant pair the
    // power iteration has isolated.
    for (int polish = 0; polish < 3; ++polish) {
        matvec(sigma, v, w);
        lambda = dot(v.data(), w.data(), n);
        double res = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = w[i] - lambda * v[i];
            res += r * r;
        }
        res = std::sqrt(res);
        if (res <= 1e-12 * std::max(lambda, scale)) break;
        std::vector<double> x;
        if (!solve_shifted(sigma, lambda, v, x)) break;
        const double xn = norm2(x);
        if (!(xn > 0.0) || !std::isfinite(xn)) break;
        for (int i = 0; i < n; ++i) v[i] = x[i] / xn;
    }

    matvec(sigma, v, w);
    lambda = dot(v.data(), w.data(), n);
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = w[i] - lambda * v[i];
        res += r * r;
    }
    if (std::sqrt(res) > 1e-8 * std::max(lambda, scale))
        throw PcaError("leading eigenvector failed to converge");
    return EigenPair{std::move(v), lambda};
}

EigenImage eigen_image(const FlattenedSeries& d, const std::vector<double>& v,
                       int slice_index) {
    if (static_cast<int>(v.size()) != d.frame_count)
        throw PcaError("eigenvector length does not match frame count");
    EigenImage img;
    img.slice_index = slice_index;
    img.values.assign(d.pixel_count, 0.0);
    for (int n = 0; n < d.frame_count; ++n) {
        const double vn = v[n];
        const double* col = &d.data[static_cast<std::size_t>(n) * d.pixel_count];
        for (int m = 0; m < d.pixel_count; ++m) img.values[m] += col[m] * vn;
    }
    return img;
}

SliceExtraction extract_slice_signal(const SliceSeries& slice,
                                     const LowpassKernel& kernel) {
    return extract_prefiltered(filter_slice(slice, kernel));
}

SliceExtraction extract_prefiltered(const SliceSeries& slice) {
    const FlattenedSeries d = flatten(slice);
    const FlattenedSeries centered = center_temporal(d);
    const SymMatrix sigma = covariance(centered);

    const double scale = sigma.trace();
    if (scale <= 1e-12 * d.pixel_count)
        throw PcaError("slice " + std::to_string(slice.slice_index) +
                       ": no temporal variation");

    EigenPair pair = leading_eigenvector(sigma);

    // canonical raw sign: largest-magnitude entry positive
    int arg = 0;
    for (int i = 1; i < static_cast<int>(pair.vector.size()); ++i)
        if (std::abs(pair.vector[i]) > std::abs(pair.vector[arg])) arg = i;
    if (pair.vector[arg] < 0.0)
        for (double& x : pair.vector) x = -x;

    SliceExtraction out;
    out.signal = RespSignal{pair.vector, SignState::Raw, slice.slice_index};
    out.image = eigen_image(d, pair.vector, slice.slice_index);
    out.eigenvalue = pair.value;
    return out;
}

}  // namespace respgate
