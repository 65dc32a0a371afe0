#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace tpso {

struct WilcoxonReport {
    double w_plus = 0.0;
    double w_minus = 0.0;
    double statistic = 0.0;      // min(w_plus, w_minus)
    std::size_t n_effective = 0; // pairs remaining after zero differences are dropped
    double p_value = 1.0;        // exact, by enumeration over sign assignments
    bool significant_at_05 = false;
};

// Matched-pairs signed-rank test on differences a - b. Zero differences are
// dropped, absolute differences ranked ascending with mid-ranks for ties.
// The exact p-value is computed from the full null distribution of the rank
// sum (all 2^n sign assignments equally likely); n_effective <= 25.
// Two-sided by default: P(min(W+, W-) <= observed statistic).
WilcoxonReport wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs,
                                    bool one_sided = false);

// Arithmetic mean and sample standard deviation (n-1 divisor).
std::pair<double, double> mean_std(const std::vector<double>& values);

struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n_points = 0;
};

// Ordinary least squares y = slope*x + intercept. A constant y gives
// r_squared = 0 by convention.
RegressionFit linear_regression(const std::vector<double>& x, const std::vector<double>& y);

} // namespace tpso
