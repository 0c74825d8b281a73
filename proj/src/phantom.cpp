#include "respgate/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "json.hpp"

namespace respgate {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec3 normalized(const Vec3& v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return Vec3{v[0] / n, v[1] / n, v[2] / n};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 rng(seed ^ (0xA0761D6478BD642FULL * (stream + 1)));
    return rng.next();
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Superior-positive diaphragm displacement, one value per frame.
std::vector<double> resp_waveform(const PhantomConfig& cfg, double phase0,
                                  SplitMix64& rng) {
    std::vector<double> out(cfg.frames);
    const double dt = cfg.frame_period_s;
    switch (cfg.resp_pattern) {
        case RespPattern::Periodic:
        case RespPattern::LongCycle: {
            const double period = cfg.resp_pattern == RespPattern::LongCycle
                                      ? 2.5 * cfg.resp_period_s
                                      : cfg.resp_period_s;
            for (int i = 0; i < cfg.frames; ++i)
                out[i] = cfg.resp_amp_px * std::sin(kTwoPi * i * dt / period + phase0);
            break;
        }
        case RespPattern::WithDrift: {
            const double total = cfg.frames * dt;
            for (int i = 0; i < cfg.frames; ++i)
                out[i] = cfg.resp_amp_px *
                             std::sin(kTwoPi * i * dt / cfg.resp_period_s + phase0) +
                         0.4 * cfg.resp_amp_px * (i * dt / total);
            break;
        }
        case RespPattern::Irregular: {
            // random walk on instantaneous period and amplitude
            double phase = phase0;
            double period = cfg.resp_period_s;
            double amp = cfg.resp_amp_px;
            for (int i = 0; i < cfg.frames; ++i) {
                out[i] = amp * std::sin(phase);
                phase += kTwoPi * dt / period;
                period = std::clamp(period * std::exp(0.02 * rng.gaussian()),
                                    0.5 * cfg.resp_period_s, 2.0 * cfg.resp_period_s);
                amp = std::clamp(amp + 0.03 * cfg.resp_amp_px * rng.gaussian(),
                                 0.5 * cfg.resp_amp_px, cfg.resp_amp_px);
            }
            break;
        }
    }
    return out;
}

std::vector<int> local_extrema(const std::vector<double>& x, bool maxima) {
    std::vector<int> out;
    for (int i = 1; i + 1 < static_cast<int>(x.size()); ++i) {
        if (maxima ? (x[i] > x[i - 1] && x[i] > x[i + 1])
                   : (x[i] < x[i - 1] && x[i] < x[i + 1]))
            out.push_back(i);
    }
    return out;
}

}  // namespace

double SplitMix64::gaussian() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

RespPattern resp_pattern_from_string(const std::string& s) {
    if (s == "periodic") return RespPattern::Periodic;
    if (s == "long-cycle") return RespPattern::LongCycle;
    if (s == "irregular") return RespPattern::Irregular;
    if (s == "with-drift") return RespPattern::WithDrift;
    throw PhantomError("unknown respiratory pattern '" + s + "'");
}

OrientationScenario orientation_from_string(const std::string& s) {
    if (s == "aligned") return OrientationScenario::Aligned;
    if (s == "transposed") return OrientationScenario::Transposed;
    if (s == "flipped") return OrientationScenario::Flipped;
    if (s == "oblique") return OrientationScenario::Oblique;
    throw PhantomError("unknown orientation scenario '" + s + "'");
}

const char* to_string(RespPattern p) {
    switch (p) {
        case RespPattern::Periodic: return "periodic";
        case RespPattern::LongCycle: return "long-cycle";
        case RespPattern::Irregular: return "irregular";
        case RespPattern::WithDrift: return "with-drift";
    }
    return "?";
}

const char* to_string(OrientationScenario o) {
    switch (o) {
        case OrientationScenario::Aligned: return "aligned";
        case OrientationScenario::Transposed: return "transposed";
        case OrientationScenario::Flipped: return "flipped";
        case OrientationScenario::Oblique: return "oblique";
    }
    return "?";
}

void PhantomConfig::validate() const {
    if (slices < 1) throw PhantomError("need at least one slice");
    if (rows < 8 || cols < 8) throw PhantomError("plane must be at least 8x8");
    if (frames < 3) throw PhantomError("need at least 3 frames");
    if (frame_period_s <= 0.0) throw PhantomError("frame period must be positive");
    if (resp_period_s <= 0.0) throw PhantomError("respiratory period must be positive");
    if (!(resp_amp_px > 0.0) || resp_amp_px >= rows / 4.0)
        throw PhantomError("respiratory amplitude must lie in (0, rows/4)");
    if (cardiac_rate_hz <= 0.8 || cardiac_rate_hz >= 2.5)
        throw PhantomError("cardiac rate must lie in (0.8, 2.5) Hz");
    if (cardiac_amp_px < 0.0) throw PhantomError("cardiac amplitude must be >= 0");
    if (noise_sigma < 0.0) throw PhantomError("noise sigma must be >= 0");
    if (!phase_offsets.empty() &&
        static_cast<int>(phase_offsets.size()) != slices)
        throw PhantomError("phase offset count must match slice count");
}

PhantomResult generate(const PhantomConfig& cfg) {
    cfg.validate();
    const int rows = cfg.rows, cols = cfg.cols, frames = cfg.frames;
    const double dt = cfg.frame_period_s;

    const bool transposed = cfg.orientation == OrientationScenario::Transposed ||
                            cfg.orientation == OrientationScenario::Oblique;
    const bool flipped = cfg.orientation == OrientationScenario::Flipped ||
                         cfg.orientation == OrientationScenario::Oblique;

    Vec3 down, right;  // directions of increasing canonical u and w
    if (cfg.orientation == OrientationScenario::Oblique) {
        down = normalized(Vec3{0.3, 0.1, -0.9});
        Vec3 h{1.0, 0.0, 0.0};
        const double proj = h[0] * down[0] + h[1] * down[1] + h[2] * down[2];
        right = normalized(Vec3{h[0] - proj * down[0], h[1] - proj * down[1],
                                h[2] - proj * down[2]});
    } else {
        down = Vec3{0.0, 0.0, -1.0};
        right = Vec3{1.0, 0.0, 0.0};
    }

    PhantomResult res;
    res.truth.resp_signal.resize(cfg.slices);
    res.truth.pe_frames.resize(cfg.slices);
    res.truth.pi_frames.resize(cfg.slices);
    res.truth.cardiac_phase.resize(cfg.slices);

    std::vector<SliceSeries> slices;
    for (int j = 0; j < cfg.slices; ++j) {
        SplitMix64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(j)));
        const double phase0 = cfg.phase_offsets.empty()
                                  ? kTwoPi * rng.uniform()
                                  : cfg.phase_offsets[j];

        const std::vector<double> resp = resp_waveform(cfg, phase0, rng);
        res.truth.resp_signal[j] = resp;
        res.truth.pe_frames[j] = local_extrema(resp, true);
        res.truth.pi_frames[j] = local_extrema(resp, false);

        // mild through-plane variation so neighboring slices look similar
        // but not identical
        const double slice_t = cfg.slices > 1
                                   ? static_cast<double>(j) / (cfg.slices - 1) - 0.5
                                   : 0.0;
        // band-shaped liver: translation changes its position, not its mass,
        // so the vertical centroid tracks the waveform linearly; sized so the
        // band (including sigmoid tails) stays interior at maximum amplitude
        const double edge_rest = 0.55 * rows;
        const double band_px = 0.12 * rows;
        const double edge_w = std::max(0.75, rows / 40.0);
        const double heart_u = 0.28 * rows + 2.0 * slice_t;
        const double heart_w = 0.5 * cols + 1.5 * slice_t;
        const double heart_r0 =
            0.12 * std::min(rows, cols) * (1.0 + 0.2 * slice_t) + cfg.cardiac_amp_px + 1.0;

        SliceSeries s;
        s.rows = transposed ? cols : rows;
        s.cols = transposed ? rows : cols;
        s.frames = frames;
        s.frame_period_s = dt;
        s.slice_index = j;
        s.pixels.assign(static_cast<std::size_t>(s.rows) * s.cols * frames, 0.0f);

        Vec3 vdir = flipped ? Vec3{-down[0], -down[1], -down[2]} : down;
        if (transposed) {
            s.row_dir = right;
            s.col_dir = vdir;
        } else {
            s.row_dir = vdir;
            s.col_dir = right;
        }

        res.truth.cardiac_phase[j].resize(frames);
        for (int i = 0; i < frames; ++i) {
            const double t = i * dt;
            res.truth.cardiac_phase[j][i] =
                std::fmod(kTwoPi * cfg.cardiac_rate_hz * t, kTwoPi);
            const double edge = edge_rest - resp[i];
            const double heart_r =
                heart_r0 +
                cfg.cardiac_amp_px * std::sin(kTwoPi * cfg.cardiac_rate_hz * t);
            for (int u = 0; u < rows; ++u) {
                const double liver = 1.2 * (sigmoid((u - edge) / edge_w) -
                                            sigmoid((u - edge - band_px) / edge_w));
                for (int w = 0; w < cols; ++w) {
                    const double du = u - heart_u, dw = w - heart_w;
                    const double dist = std::sqrt(du * du + dw * dw);
                    double v = 0.05 + liver + 0.6 * sigmoid(heart_r - dist);
                    if (cfg.noise_sigma > 0.0)
                        v += cfg.noise_sigma * rng.gaussian();
                    if (v < 0.0) v = 0.0;
                    const int r = transposed ? w : (flipped ? rows - 1 - u : u);
                    const int c = transposed ? (flipped ? rows - 1 - u : u) : w;
                    s.at(r, c, i) = static_cast<float>(v);
                }
            }
        }

        // R-waves at cardiac phase zero
        for (int k = 0;; ++k) {
            const double t = k / cfg.cardiac_rate_hz;
            if (t > frames * dt) break;
            s.rwave_times_s.push_back(t);
        }

        slices.push_back(std::move(s));
    }

    res.stack = CineStack::create(std::move(slices));
    return res;
}

std::vector<CineStack> split_series(const CineStack& stack, int parts) {
    if (parts < 1) throw PhantomError("parts must be >= 1");
    const int n = stack.frames();
    std::vector<CineStack> out;
    int start = 0;
    for (int p = 0; p < parts; ++p) {
        const int len = n / parts + (p < n % parts ? 1 : 0);
        if (len < 3)
            throw PhantomError("split part " + std::to_string(p) +
                               " would have fewer than 3 frames");
        const double dt = stack.frame_period_s();
        const double t0 = start * dt;
        const double t1 = (start + len) * dt;
        std::vector<SliceSeries> slices;
        for (const auto& s : stack.slices) {
            SliceSeries part = s;
            part.frames = len;
            const std::size_t frame_px =
                static_cast<std::size_t>(s.rows) * s.cols;
            part.pixels.assign(s.pixels.begin() + start * frame_px,
                               s.pixels.begin() + (start + len) * frame_px);
            part.rwave_times_s.clear();
            // half-open [t0, t1): a trigger on the boundary starts the next part
            constexpr double eps = 1e-9;
            for (double t : s.rwave_times_s)
                if (t >= t0 - eps && t < t1 - eps)
                    part.rwave_times_s.push_back(std::max(0.0, t - t0));
            slices.push_back(std::move(part));
        }
        out.push_back(CineStack::create(std::move(slices)));
        start += len;
    }
    return out;
}

void save_truth(const PhantomTruth& truth, const std::filesystem::path& path) {
    nlohmann::json j;
    j["resp_signal"] = truth.resp_signal;
    j["pe_frames"] = truth.pe_frames;
    j["pi_frames"] = truth.pi_frames;
    j["cardiac_phase"] = truth.cardiac_phase;
    std::ofstream out(path);
    if (!out) throw PhantomError("cannot write " + path.string());
    out << j.dump() << "\n";
}

PhantomTruth load_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PhantomError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw PhantomError("malformed truth file: " + std::string(e.what()));
    }
    PhantomTruth t;
    t.resp_signal = j.at("resp_signal").get<std::vector<std::vector<double>>>();
    t.pe_frames = j.at("pe_frames").get<std::vector<std::vector<int>>>();
    t.pi_frames = j.at("pi_frames").get<std::vector<std::vector<int>>>();
    if (j.contains("cardiac_phase"))
        t.cardiac_phase = j["cardiac_phase"].get<std::vector<std::vector<double>>>();
    return t;
}

std::vector<PhantomTruth> split_truth(const PhantomTruth& truth, int frames,
                                      int parts) {
    if (parts < 1) throw PhantomError("parts must be >= 1");
    std::vector<PhantomTruth> out(parts);
    int start = 0;
    for (int p = 0; p < parts; ++p) {
        const int len = frames / parts + (p < frames % parts ? 1 : 0);
        PhantomTruth& t = out[p];
        const std::size_t j_count = truth.resp_signal.size();
        t.resp_signal.resize(j_count);
        t.pe_frames.resize(j_count);
        t.pi_frames.resize(j_count);
        t.cardiac_phase.resize(j_count);
        for (std::size_t j = 0; j < j_count; ++j) {
            t.resp_signal[j].assign(truth.resp_signal[j].begin() + start,
                                    truth.resp_signal[j].begin() + start + len);
            if (!truth.cardiac_phase[j].empty())
                t.cardiac_phase[j].assign(
                    truth.cardiac_phase[j].begin() + start,
                    truth.cardiac_phase[j].begin() + start + len);
            for (int f : truth.pe_frames[j])
                if (f >= start && f < start + len)
                    t.pe_frames[j].push_back(f - start);
            for (int f : truth.pi_frames[j])
                if (f >= start && f < start + len)
                    t.pi_frames[j].push_back(f - start);
        }
        start += len;
    }
    return out;
}

}  // namespace respgate
