#include "respgate/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "respgate/directionality.hpp"

namespace respgate {

std::vector<double> correlate_with_reference(
    const std::vector<RespSignal>& signals,
    const std::vector<std::vector<double>>& refs) {
    if (signals.size() != refs.size())
        throw EvalError("signal / reference count mismatch");
    std::vector<double> out;
    out.reserve(signals.size());
    for (std::size_t j = 0; j < signals.size(); ++j) {
        if (signals[j].values.size() != refs[j].size())
            throw EvalError("slice " + std::to_string(j) + ": length mismatch");
        try {
            out.push_back(pearson(signals[j].values, refs[j]));
        } catch (const DirectionalityError& e) {
            throw EvalError("slice " + std::to_string(j) + ": " + e.what());
        }
    }
    return out;
}

double sign_accuracy(const std::vector<double>& correlations) {
    if (correlations.empty()) throw EvalError("no correlations");
    int positive = 0;
    for (double r : correlations)
        if (r > 0.0) ++positive;
    return static_cast<double>(positive) / static_cast<double>(correlations.size());
}

SummaryStats summarize(const std::vector<double>& correlations) {
    if (correlations.empty()) throw EvalError("no correlations");
    const int n = static_cast<int>(correlations.size());
    SummaryStats s;
    for (double r : correlations) s.mean += r;
    s.mean /= n;
    double ss = 0.0;
    for (double r : correlations) ss += (r - s.mean) * (r - s.mean);
    s.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    std::vector<double> sorted(correlations);
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.median = n % 2 ? sorted[n / 2]
                     : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return s;
}

}  // namespace respgate
