#include "tpso/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace tpso {

WilcoxonReport wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs,
                                    bool one_sided) {
    if (pairs.size() < 5)
        throw std::invalid_argument("wilcoxon_signed_rank: need at least 5 pairs");

    std::vector<double> diffs;
    for (const auto& [a, b] : pairs) {
        double d = a - b;
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty())
        throw std::invalid_argument("wilcoxon_signed_rank: all differences zero");
    std::size_t n = diffs.size();
    if (n > 25)
        throw std::invalid_argument("wilcoxon_signed_rank: exact test limited to 25 non-zero pairs");

    // rank |d| ascending, mid-ranks for ties
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(diffs[a]) < std::fabs(diffs[b]);
    });
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && std::fabs(diffs[order[j + 1]]) == std::fabs(diffs[order[i]])) ++j;
        double mid = 0.5 * static_cast<double>(i + j) + 1.0; // 1-based
        for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
        i = j + 1;
    }

    WilcoxonReport rep;
    rep.n_effective = n;
    for (std::size_t t = 0; t < n; ++t)
        (diffs[t] > 0.0 ? rep.w_plus : rep.w_minus) += rank[t];
    rep.statistic = std::min(rep.w_plus, rep.w_minus);

    // Null distribution of W+ via subset-sum counting over doubled ranks
    // (mid-ranks are multiples of 1/2, so doubling makes them integers).
    std::vector<std::int64_t> r2(n);
    std::int64_t total2 = 0;
    for (std::size_t t = 0; t < n; ++t) {
        r2[t] = std::llround(2.0 * rank[t]);
        total2 += r2[t];
    }
    std::vector<std::uint64_t> count(static_cast<std::size_t>(total2) + 1, 0);
    count[0] = 1;
    std::int64_t reach = 0;
    for (std::size_t t = 0; t < n; ++t) {
        reach += r2[t];
        for (std::int64_t s = reach; s >= r2[t]; --s)
            count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r2[t])];
    }
    const double denom = std::ldexp(1.0, static_cast<int>(n)); // 2^n

    auto tail_leq = [&](std::int64_t lim) {
        std::uint64_t c = 0;
        for (std::int64_t s = 0; s <= std::min(lim, total2); ++s)
            c += count[static_cast<std::size_t>(s)];
        return c;
    };
    auto tail_geq = [&](std::int64_t lim) {
        std::uint64_t c = 0;
        for (std::int64_t s = std::max<std::int64_t>(lim, 0); s <= total2; ++s)
            c += count[static_cast<std::size_t>(s)];
        return c;
    };

    std::int64_t wp2 = std::llround(2.0 * rep.w_plus);
    if (one_sided) {
        // smaller-tail probability of the observed rank sum
        std::uint64_t c = (rep.w_plus <= rep.w_minus) ? tail_leq(wp2) : tail_geq(wp2);
        rep.p_value = static_cast<double>(c) / denom;
    } else {
        std::int64_t t2 = std::llround(2.0 * rep.statistic);
        std::uint64_t lo = tail_leq(t2);
        std::uint64_t hi = tail_geq(std::max(total2 - t2, t2 + 1));
        rep.p_value = static_cast<double>(lo + hi) / denom;
    }
    if (rep.p_value > 1.0) rep.p_value = 1.0;
    rep.significant_at_05 = rep.p_value <= 0.05;
    return rep;
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
    if (values.size() < 2)
        throw std::invalid_argument("mean_std: need at least 2 values");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    double var = ss / static_cast<double>(values.size() - 1);
    return {mean, std::sqrt(var)};
}

RegressionFit linear_regression(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("linear_regression: x and y lengths differ");
    if (x.size() < 3)
        throw std::invalid_argument("linear_regression: need at least 3 points");

    std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) { mx += x[i]; my += y[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0)
        throw std::invalid_argument("linear_regression: x values are all equal");

    RegressionFit fit;
    fit.n_points = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy == 0.0) {
        fit.r_squared = 0.0;
    } else {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = y[i] - (fit.slope * x[i] + fit.intercept);
            ss_res += e * e;
        }
        fit.r_squared = 1.0 - ss_res / syy;
        if (fit.r_squared < 0.0) fit.r_squared = 0.0;
        if (fit.r_squared > 1.0) fit.r_squared = 1.0;
    }
    return fit;
}

} // namespace tpso
