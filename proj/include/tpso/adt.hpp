#pragma once

#include "tpso/dataset.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tpso {

// Decision node: a single condition on one feature. Numeric features test
// value <= threshold, categorical features test value == threshold (a code).
struct AdtDecision {
    int parent_prediction = -1;
    int feature = -1;
    ColumnKind kind = ColumnKind::numeric;
    double threshold = 0.0;
    int true_prediction = -1;
    int false_prediction = -1;
};

struct AdtPrediction {
    double value = 0.0;
    int parent_decision = -1; // -1 for the root
    bool on_true_branch = false;
};

// Alternating layers of decision and prediction nodes. predictions[0] is the
// root; every decision node hangs off an earlier prediction node and owns
// exactly two prediction children, so a single forward pass over the arenas
// visits every satisfied path.
struct AdtModel {
    std::vector<AdtPrediction> predictions;
    std::vector<AdtDecision> decisions;
    std::size_t boosting_rounds = 0;
    std::string positive_label;
    std::string negative_label;
    std::vector<std::string> feature_names;
    std::vector<ColumnKind> feature_kinds;
    std::vector<double> loss_history; // total boosting weight after the root and each round

    double root_prediction() const { return predictions.at(0).value; }
};

// Precomputed per-column argsort, reusable across many train calls on the
// same records (the wrapper evaluator trains hundreds of models per fold).
struct ColumnOrder {
    std::vector<std::vector<std::uint32_t>> by_feature;
    static ColumnOrder build(const Dataset& dataset);
};

// Boosted construction: root prediction 1/2*ln(W+/W-); each round adds the
// (precondition, condition) pair minimizing
//   Z = 2*(sqrt(W+(c1&c2) W-(c1&c2)) + sqrt(W+(c1&!c2) W-(c1&!c2))) + W(!c1)
// with prediction values 1/2*ln((W+ + eps)/(W- + eps)), eps = 1/(2n), and
// reweighting w <- w*exp(-y*prediction). Ties break on lowest feature index,
// then lowest threshold, then earliest precondition.
AdtModel train_adt(const Dataset& train, std::size_t rounds, std::uint64_t seed);

// Same construction restricted to the active features; the model keeps the
// full training schema. Equivalent to training on project(train, active).
AdtModel train_adt_masked(const Dataset& train, const Mask& active, std::size_t rounds,
                          std::uint64_t seed, const ColumnOrder* order = nullptr);

struct Classification {
    std::string label;
    double margin = 0.0;
};

// Margin = sum of prediction values over all satisfied root paths; positive
// margin means the positive class, zero falls to the negative class.
Classification classify(const AdtModel& model, std::span<const double> record);

double accuracy(const AdtModel& model, const Dataset& test);

nlohmann::json adt_to_json(const AdtModel& model);
AdtModel adt_from_json(const nlohmann::json& j);

} // namespace tpso
