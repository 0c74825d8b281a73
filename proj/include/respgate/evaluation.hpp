#pragma once

#include <vector>

#include "respgate/stack.hpp"

namespace respgate {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-slice Pearson correlation between the resolved signals and references.
std::vector<double> correlate_with_reference(
    const std::vector<RespSignal>& signals,
    const std::vector<std::vector<double>>& refs);

// Fraction of correlations that are strictly positive.
double sign_accuracy(const std::vector<double>& correlations);

struct SummaryStats {
    double mean = 0.0;
    double sd = 0.0;  // sample SD, N-1 denominator
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

SummaryStats summarize(const std::vector<double>& correlations);

}  // namespace respgate
