#include "tpso/fscore.hpp"

#include <algorithm>
#include <stdexcept>

namespace tpso {

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty vector");
    std::sort(values.begin(), values.end());
    std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double feature_score(const Dataset& dataset, std::size_t i) {
    if (i >= dataset.n_features())
        throw std::out_of_range("feature_score: feature index out of range");

    const auto& col = dataset.columns[i];
    std::vector<double> pos, neg;
    pos.reserve(dataset.n_records);
    neg.reserve(dataset.n_records);
    for (std::size_t r = 0; r < dataset.n_records; ++r)
        (dataset.labels[r] > 0 ? pos : neg).push_back(col.values[r]);

    if (pos.size() < 2 || neg.size() < 2)
        throw std::invalid_argument("feature_score: each class needs at least 2 records");

    double med_pos = median(pos);
    double med_neg = median(neg);
    double med_all = median(col.values);

    double dp = med_pos - med_all;
    double dn = med_neg - med_all;
    double v1 = dp * dp + dn * dn;

    double ss_pos = 0.0, ss_neg = 0.0;
    for (double x : pos) ss_pos += (x - med_pos) * (x - med_pos);
    for (double x : neg) ss_neg += (x - med_neg) * (x - med_neg);
    double v2 = ss_pos / static_cast<double>(pos.size() - 1) +
                ss_neg / static_cast<double>(neg.size() - 1);

    if (v2 == 0.0) return 0.0; // constant within both classes
    return v1 / v2;
}

FeatureScores score_all(const Dataset& dataset) {
    FeatureScores fs;
    fs.scores.reserve(dataset.n_features());
    for (std::size_t i = 0; i < dataset.n_features(); ++i)
        fs.scores.push_back(feature_score(dataset, i));
    fs.total = 0.0;
    for (double s : fs.scores) fs.total += s;
    return fs;
}

double subset_ratio(const FeatureScores& scores, const Mask& mask) {
    if (mask.size() != scores.scores.size())
        throw std::invalid_argument("subset_ratio: mask length does not match score count");
    if (!(scores.total > 0.0))
        throw std::invalid_argument("subset_ratio: total score must be positive");
    double sum = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) sum += scores.scores[i];
    // partial sums of non-negative terms; guard float noise at the full mask
    if (sum > scores.total) sum = scores.total;
    return sum / scores.total;
}

} // namespace tpso
