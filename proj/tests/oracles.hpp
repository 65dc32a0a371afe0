#pragma once

// Independent re-implementations used only to check the library. Everything
// here is written directly from the defining formulas, on purpose sharing no
// code with src/: plain sorts instead of cached orders, explicit path
// recursion instead of the forward pass, full enumeration instead of dynamic
// programming.

#include "tpso/adt.hpp"
#include "tpso/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("oracle median: empty");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// F(i) = V1 / V2 with V1 the squared deviations of the class medians from
// the overall median and V2 the sum of median-centered per-class dispersions
// with n-1 denominators. V2 = 0 maps to 0.
inline double feature_score(const std::vector<double>& values,
                            const std::vector<int>& labels) {
    std::vector<double> pos, neg;
    for (std::size_t k = 0; k < values.size(); ++k)
        (labels[k] > 0 ? pos : neg).push_back(values[k]);
    if (pos.size() < 2 || neg.size() < 2)
        throw std::invalid_argument("oracle feature_score: class too small");

    double med_all = median_of(values);
    double med_pos = median_of(pos);
    double med_neg = median_of(neg);

    double v1 = (med_pos - med_all) * (med_pos - med_all) +
                (med_neg - med_all) * (med_neg - med_all);

    double ss_pos = 0.0;
    for (double x : pos) ss_pos += (x - med_pos) * (x - med_pos);
    double ss_neg = 0.0;
    for (double x : neg) ss_neg += (x - med_neg) * (x - med_neg);
    double v2 = ss_pos / (static_cast<double>(pos.size()) - 1.0) +
                ss_neg / (static_cast<double>(neg.size()) - 1.0);

    if (v2 == 0.0) return 0.0;
    return v1 / v2;
}

// Best achievable training accuracy of any single decision stump
// (feature, threshold, polarity) on 1-D-per-feature numeric data.
inline double best_stump_accuracy(const tpso::Dataset& data) {
    double best = 0.0;
    const double n = static_cast<double>(data.n_records);
    for (const auto& column : data.columns) {
        std::vector<double> cuts = column.values;
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        std::vector<double> thresholds;
        thresholds.push_back(cuts.front() - 1.0);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
            thresholds.push_back(0.5 * (cuts[i] + cuts[i + 1]));
        for (double t : thresholds) {
            std::size_t low_pos = 0;
            for (std::size_t k = 0; k < data.n_records; ++k)
                if ((column.values[k] <= t) == (data.labels[k] > 0)) ++low_pos;
            double acc = static_cast<double>(low_pos) / n;
            best = std::max(best, std::max(acc, 1.0 - acc));
        }
    }
    return best;
}

// Margin by explicit path recursion: start at the root prediction; every
// decision hanging off a reached prediction is tested, and the chosen
// branch's prediction value joins the sum before recursing below it.
inline double margin_by_paths(const tpso::AdtModel& model,
                              const std::vector<double>& record) {
    double sum = 0.0;
    auto visit = [&](auto&& self, int prediction) -> void {
        sum += model.predictions[static_cast<std::size_t>(prediction)].value;
        for (std::size_t d = 0; d < model.decisions.size(); ++d) {
            const auto& decision = model.decisions[d];
            if (decision.parent_prediction != prediction) continue;
            double value = record[static_cast<std::size_t>(decision.feature)];
            bool holds = decision.kind == tpso::ColumnKind::numeric
                             ? value <= decision.threshold
                             : value == decision.threshold;
            self(self, holds ? decision.true_prediction : decision.false_prediction);
        }
    };
    visit(visit, 0);
    return sum;
}

struct WilcoxonOracle {
    double w_plus = 0.0;
    double w_minus = 0.0;
    double statistic = 0.0;
    std::size_t n = 0;
    double p_two_sided = 0.0;
};

// Exact test by full enumeration of all 2^n sign assignments over the
// observed absolute differences (mid-ranks). p = P(min(W+, W-) <= observed).
inline WilcoxonOracle wilcoxon_enumerated(const std::vector<double>& diffs) {
    std::vector<double> abs_d;
    for (double d : diffs)
        if (d != 0.0) abs_d.push_back(std::fabs(d));
    std::size_t n = abs_d.size();
    if (n == 0) throw std::invalid_argument("oracle wilcoxon: all zero");
    if (n > 20) throw std::invalid_argument("oracle wilcoxon: n too large");

    // mid-ranks of |d|
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return abs_d[a] < abs_d[b]; });
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
        double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }

    WilcoxonOracle out;
    out.n = n;
    std::size_t idx = 0;
    for (double d : diffs) {
        if (d == 0.0) continue;
        if (d > 0.0) out.w_plus += rank[idx];
        else out.w_minus += rank[idx];
        ++idx;
    }
    out.statistic = std::min(out.w_plus, out.w_minus);

    double total = 0.0;
    for (double r : rank) total += r;
    std::size_t hits = 0;
    const std::size_t assignments = std::size_t{1} << n;
    for (std::size_t bits = 0; bits < assignments; ++bits) {
        double wp = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            if (bits & (std::size_t{1} << k)) wp += rank[k];
        double stat = std::min(wp, total - wp);
        if (stat <= out.statistic + 1e-12) ++hits;
    }
    out.p_two_sided = static_cast<double>(hits) / static_cast<double>(assignments);
    return out;
}

// Direct restatement of the three finite-difference stop conditions over a
// four-point fitness window.
inline bool stop_conditions(const std::array<double, 4>& y) {
    double dv1 = y[1] - y[0];
    double dv2 = y[2] - y[1];
    double dv3 = y[3] - y[2];
    return dv1 > dv2 && dv2 > dv3 && (dv3 - dv2) < 0.0;
}

} // namespace oracle
