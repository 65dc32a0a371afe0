#pragma once

#include "tpso/dataset.hpp"

#include <vector>

namespace tpso {

// Per-feature discrimination scores plus their sum. The sum is the
// denominator of the subset score ratio and must be positive before fitness
// evaluation.
struct FeatureScores {
    std::vector<double> scores;
    double total = 0.0;
};

// Middle value of the sorted vector; mean of the two middle values when the
// length is even.
double median(std::vector<double> values);

// Median-based discrimination score of feature i: squared deviations of the
// class medians from the overall median, over the sum of median-centered
// per-class dispersions. A feature constant within both classes scores 0.
double feature_score(const Dataset& dataset, std::size_t i);

FeatureScores score_all(const Dataset& dataset);

// Sum of scores over the masked features divided by the total; in [0, 1].
double subset_ratio(const FeatureScores& scores, const Mask& mask);

} // namespace tpso
