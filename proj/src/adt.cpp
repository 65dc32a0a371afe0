#include "tpso/adt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tpso {

ColumnOrder ColumnOrder::build(const Dataset& dataset) {
    ColumnOrder order;
    order.by_feature.resize(dataset.n_features());
    for (std::size_t f = 0; f < dataset.n_features(); ++f) {
        auto& idx = order.by_feature[f];
        idx.resize(dataset.n_records);
        for (std::uint32_t r = 0; r < dataset.n_records; ++r) idx[r] = r;
        const auto& vals = dataset.columns[f].values;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return vals[a] < vals[b]; });
    }
    return order;
}

namespace {

struct Candidate {
    double z = std::numeric_limits<double>::infinity();
    int pred = -1;
    int feature = -1;
    double threshold = 0.0;
    double w1p = 0.0, w1n = 0.0, w2p = 0.0, w2n = 0.0;
};

bool improves(double z, int feature, double threshold, int pred, const Candidate& best) {
    if (z != best.z) return z < best.z;
    if (feature != best.feature) return feature < best.feature;
    if (threshold != best.threshold) return threshold < best.threshold;
    return pred < best.pred;
}

inline double sqrt_pos(double x) { return x > 0.0 ? std::sqrt(x) : 0.0; }

inline double split_z(double wlp, double wln, double wrp, double wrn, double w_rest) {
    return 2.0 * (sqrt_pos(wlp * wln) + sqrt_pos(wrp * wrn)) + w_rest;
}

} // namespace

AdtModel train_adt_masked(const Dataset& train, const Mask& active, std::size_t rounds,
                          std::uint64_t /*seed*/, const ColumnOrder* order) {
    const std::size_t n = train.n_records;
    const std::size_t m = train.n_features();
    if (rounds < 1) throw std::invalid_argument("train_adt: rounds must be >= 1");
    if (n == 0) throw std::invalid_argument("train_adt: empty training set");
    if (active.size() != m) throw std::invalid_argument("train_adt: mask length mismatch");
    if (popcount(active) == 0) throw std::invalid_argument("train_adt: empty feature mask");

    std::size_t n_pos = train.count_label(+1);
    std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("train_adt: single-class training data");

    ColumnOrder local_order;
    if (!order) {
        local_order = ColumnOrder::build(train);
        order = &local_order;
    } else if (order->by_feature.size() != m ||
               (m > 0 && order->by_feature[0].size() != n)) {
        throw std::invalid_argument("train_adt: column order does not match dataset");
    }

    std::vector<int> active_features;
    for (std::size_t f = 0; f < m; ++f)
        if (active[f]) active_features.push_back(static_cast<int>(f));

    AdtModel model;
    model.boosting_rounds = rounds;
    model.positive_label = train.positive_label;
    model.negative_label = train.negative_label;
    for (const auto& col : train.columns) {
        model.feature_names.push_back(col.name);
        model.feature_kinds.push_back(col.kind);
    }

    const double eps = 1.0 / (2.0 * static_cast<double>(n));
    std::vector<double> w(n, 1.0);
    const std::vector<std::int8_t>& y = train.labels;

    double root = 0.5 * std::log(static_cast<double>(n_pos) / static_cast<double>(n_neg));
    model.predictions.push_back({root, -1, false});
    for (std::size_t r = 0; r < n; ++r) w[r] *= std::exp(-static_cast<double>(y[r]) * root);

    // record indices reaching each prediction node's path
    std::vector<std::vector<std::uint32_t>> members;
    members.emplace_back();
    members[0].resize(n);
    for (std::uint32_t r = 0; r < n; ++r) members[0][r] = r;

    double w_total = 0.0;
    for (std::size_t r = 0; r < n; ++r) w_total += w[r];
    model.loss_history.push_back(w_total);

    std::vector<std::uint32_t> stamp(n, 0);
    std::uint32_t stamp_now = 0;
    std::vector<double> cat_wp, cat_wn;

    for (std::size_t round = 0; round < rounds; ++round) {
        Candidate best;
        w_total = 0.0;
        for (std::size_t r = 0; r < n; ++r) w_total += w[r];

        for (std::size_t p = 0; p < model.predictions.size(); ++p) {
            const auto& set = members[p];
            if (set.empty()) continue;

            ++stamp_now;
            double wp_all = 0.0, wn_all = 0.0;
            for (std::uint32_t r : set) {
                stamp[r] = stamp_now;
                (y[r] > 0 ? wp_all : wn_all) += w[r];
            }
            double w_rest = w_total - wp_all - wn_all;

            for (int f : active_features) {
                const auto& col = train.columns[static_cast<std::size_t>(f)];
                if (col.kind == ColumnKind::numeric) {
                    const auto& idx = order->by_feature[static_cast<std::size_t>(f)];
                    double wlp = 0.0, wln = 0.0;
                    double prev = 0.0;
                    bool seen = false;
                    for (std::uint32_t r : idx) {
                        if (stamp[r] != stamp_now) continue;
                        double v = col.values[r];
                        if (seen && v != prev) {
                            double thr = 0.5 * (prev + v);
                            double z = split_z(wlp, wln, wp_all - wlp, wn_all - wln, w_rest);
                            if (improves(z, f, thr, static_cast<int>(p), best)) {
                                best = {z, static_cast<int>(p), f, thr,
                                        wlp, wln, wp_all - wlp, wn_all - wln};
                            }
                        }
                        (y[r] > 0 ? wlp : wln) += w[r];
                        prev = v;
                        seen = true;
                    }
                } else {
                    std::size_t n_cat = col.categories.size();
                    if (n_cat == 0) continue;
                    cat_wp.assign(n_cat, 0.0);
                    cat_wn.assign(n_cat, 0.0);
                    for (std::uint32_t r : set) {
                        auto c = static_cast<std::size_t>(col.values[r]);
                        (y[r] > 0 ? cat_wp : cat_wn)[c] += w[r];
                    }
                    for (std::size_t c = 0; c < n_cat; ++c) {
                        double z = split_z(cat_wp[c], cat_wn[c],
                                           wp_all - cat_wp[c], wn_all - cat_wn[c], w_rest);
                        double thr = static_cast<double>(c);
                        if (improves(z, f, thr, static_cast<int>(p), best)) {
                            best = {z, static_cast<int>(p), f, thr,
                                    cat_wp[c], cat_wn[c], wp_all - cat_wp[c], wn_all - cat_wn[c]};
                        }
                    }
                }
            }
        }

        if (best.feature < 0) break; // nothing left to split on

        double a = 0.5 * std::log((best.w1p + eps) / (best.w1n + eps));
        double b = 0.5 * std::log((best.w2p + eps) / (best.w2n + eps));

        int d_idx = static_cast<int>(model.decisions.size());
        int t_idx = static_cast<int>(model.predictions.size());
        const auto& col = train.columns[static_cast<std::size_t>(best.feature)];
        model.decisions.push_back({best.pred, best.feature, col.kind, best.threshold,
                                   t_idx, t_idx + 1});
        model.predictions.push_back({a, d_idx, true});
        model.predictions.push_back({b, d_idx, false});

        std::vector<std::uint32_t> true_set, false_set;
        for (std::uint32_t r : members[static_cast<std::size_t>(best.pred)]) {
            double v = col.values[r];
            bool cond = (col.kind == ColumnKind::numeric) ? (v <= best.threshold)
                                                          : (v == best.threshold);
            if (cond) {
                w[r] *= std::exp(-static_cast<double>(y[r]) * a);
                true_set.push_back(r);
            } else {
                w[r] *= std::exp(-static_cast<double>(y[r]) * b);
                false_set.push_back(r);
            }
        }
        members.push_back(std::move(true_set));
        members.push_back(std::move(false_set));

        double total = 0.0;
        for (std::size_t r = 0; r < n; ++r) total += w[r];
        model.loss_history.push_back(total);
    }

    return model;
}

AdtModel train_adt(const Dataset& train, std::size_t rounds, std::uint64_t seed) {
    return train_adt_masked(train, Mask(train.n_features(), true), rounds, seed);
}

namespace {

double margin_of(const AdtModel& model, std::span<const double> record,
                 std::vector<char>& reached) {
    reached.assign(model.predictions.size(), 0);
    reached[0] = 1;
    double margin = model.predictions[0].value;
    // decisions reference earlier predictions only, so one forward pass
    // follows every satisfied path
    for (const auto& d : model.decisions) {
        if (!reached[static_cast<std::size_t>(d.parent_prediction)]) continue;
        double v = record[static_cast<std::size_t>(d.feature)];
        bool cond = (d.kind == ColumnKind::numeric) ? (v <= d.threshold) : (v == d.threshold);
        int child = cond ? d.true_prediction : d.false_prediction;
        reached[static_cast<std::size_t>(child)] = 1;
        margin += model.predictions[static_cast<std::size_t>(child)].value;
    }
    return margin;
}

} // namespace

Classification classify(const AdtModel& model, std::span<const double> record) {
    if (record.size() != model.feature_names.size())
        throw std::invalid_argument("classify: record width does not match training schema");
    std::vector<char> reached;
    double margin = margin_of(model, record, reached);
    return {margin > 0.0 ? model.positive_label : model.negative_label, margin};
}

double accuracy(const AdtModel& model, const Dataset& test) {
    if (test.n_records == 0) throw std::invalid_argument("accuracy: empty test set");
    if (test.n_features() != model.feature_names.size())
        throw std::invalid_argument("accuracy: test schema does not match training schema");
    for (std::size_t f = 0; f < test.n_features(); ++f)
        if (test.columns[f].name != model.feature_names[f])
            throw std::invalid_argument("accuracy: test column '" + test.columns[f].name +
                                        "' does not match training schema");

    std::vector<double> row(test.n_features());
    std::vector<char> reached;
    std::size_t correct = 0;
    for (std::size_t r = 0; r < test.n_records; ++r) {
        for (std::size_t f = 0; f < test.n_features(); ++f) row[f] = test.columns[f].values[r];
        double margin = margin_of(model, row, reached);
        std::int8_t predicted = margin > 0.0 ? +1 : -1;
        if (predicted == test.labels[r]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.n_records);
}

nlohmann::json adt_to_json(const AdtModel& model) {
    nlohmann::json j;
    j["root_prediction"] = model.root_prediction();
    j["boosting_rounds"] = model.boosting_rounds;
    j["positive_label"] = model.positive_label;
    j["negative_label"] = model.negative_label;
    j["features"] = nlohmann::json::array();
    for (std::size_t f = 0; f < model.feature_names.size(); ++f) {
        j["features"].push_back(
            {{"name", model.feature_names[f]},
             {"kind", model.feature_kinds[f] == ColumnKind::numeric ? "numeric" : "categorical"}});
    }
    j["predictions"] = nlohmann::json::array();
    for (const auto& p : model.predictions)
        j["predictions"].push_back({{"value", p.value},
                                    {"parent_decision", p.parent_decision},
                                    {"on_true_branch", p.on_true_branch}});
    j["decisions"] = nlohmann::json::array();
    for (const auto& d : model.decisions)
        j["decisions"].push_back({{"parent_prediction", d.parent_prediction},
                                  {"feature", d.feature},
                                  {"kind", d.kind == ColumnKind::numeric ? "numeric" : "categorical"},
                                  {"threshold", d.threshold},
                                  {"true_prediction", d.true_prediction},
                                  {"false_prediction", d.false_prediction}});
    j["loss_history"] = model.loss_history;
    return j;
}

AdtModel adt_from_json(const nlohmann::json& j) {
    AdtModel model;
    model.boosting_rounds = j.at("boosting_rounds").get<std::size_t>();
    model.positive_label = j.at("positive_label").get<std::string>();
    model.negative_label = j.at("negative_label").get<std::string>();
    for (const auto& f : j.at("features")) {
        model.feature_names.push_back(f.at("name").get<std::string>());
        model.feature_kinds.push_back(f.at("kind").get<std::string>() == "numeric"
                                          ? ColumnKind::numeric
                                          : ColumnKind::categorical);
    }
    for (const auto& p : j.at("predictions"))
        model.predictions.push_back({p.at("value").get<double>(),
                                     p.at("parent_decision").get<int>(),
                                     p.at("on_true_branch").get<bool>()});
    for (const auto& d : j.at("decisions"))
        model.decisions.push_back({d.at("parent_prediction").get<int>(),
                                   d.at("feature").get<int>(),
                                   d.at("kind").get<std::string>() == "numeric"
                                       ? ColumnKind::numeric
                                       : ColumnKind::categorical,
                                   d.at("threshold").get<double>(),
                                   d.at("true_prediction").get<int>(),
                                   d.at("false_prediction").get<int>()});
    model.loss_history = j.at("loss_history").get<std::vector<double>>();
    if (model.predictions.empty())
        throw std::invalid_argument("adt_from_json: model lacks a root prediction");
    return model;
}

} // namespace tpso
