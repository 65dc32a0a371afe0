#include "tpso/tpso.hpp"

#include "tpso/parallel.hpp"
#include "tpso/rng.hpp"
#include "tpso/stats.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace tpso {

double fitness(double accuracy, double m1, double m2) {
    if (!(m2 > 0.0)) throw std::invalid_argument("fitness: m2 must be positive");
    if (m1 < 0.0 || m1 > m2)
        throw std::invalid_argument("fitness: m1 must lie in [0, m2]");
    if (accuracy < 0.0 || accuracy > 1.0)
        throw std::invalid_argument("fitness: accuracy must lie in [0, 1]");
    return 0.5 * accuracy + 0.5 * (m1 / m2);
}

bool local_max_reached(const std::vector<double>& fitness_values, StopRule rule) {
    if (fitness_values.size() < 4) return false;
    const std::size_t n = fitness_values.size();
    const double d1 = fitness_values[n - 3] - fitness_values[n - 4];
    const double d2 = fitness_values[n - 2] - fitness_values[n - 3];
    const double d3 = fitness_values[n - 1] - fitness_values[n - 2];

    if (rule == StopRule::diminishing_returns)
        return d1 > d2 && d2 > d3 && (d3 - d2) < 0.0;

    // Reciprocal increments; a flat step makes the slope diverge, so stop.
    if (d1 == 0.0 || d2 == 0.0 || d3 == 0.0) return true;
    const double g1 = 1.0 / d1;
    const double g2 = 1.0 / d2;
    const double g3 = 1.0 / d3;
    return g1 > g2 && g2 > g3 && (g3 - g2) < 0.0;
}

bool local_max_reached(const TuneTrace& trace, StopRule rule) {
    std::vector<double> values;
    values.reserve(trace.entries.size());
    for (const auto& entry : trace.entries) values.push_back(entry.fitness);
    return local_max_reached(values, rule);
}

WrapperEvaluator::WrapperEvaluator(const Dataset& train, std::size_t inner_folds,
                                   std::size_t boosting_rounds, std::uint64_t seed)
    : boosting_rounds_(boosting_rounds), seed_(seed) {
    if (inner_folds < 2)
        throw std::invalid_argument("wrapper evaluator: inner_folds must be >= 2");
    if (boosting_rounds < 1)
        throw std::invalid_argument("wrapper evaluator: boosting_rounds must be >= 1");

    const std::size_t minority =
        std::min(train.count_label(+1), train.count_label(-1));
    const std::size_t k = std::min(inner_folds, minority);
    if (k >= 2) {
        FoldPlan plan = stratified_kfold(train, k, derive_seed(seed, 0x1CFULL));
        folds_.reserve(k);
        for (std::size_t f = 0; f < k; ++f) {
            InnerFold fold;
            fold.train = take_rows(train, plan.folds[f].first);
            fold.test = take_rows(train, plan.folds[f].second);
            fold.order = ColumnOrder::build(fold.train);
            folds_.push_back(std::move(fold));
        }
    } else {
        InnerFold fold;
        fold.train = train;
        fold.test = train;
        fold.order = ColumnOrder::build(fold.train);
        folds_.push_back(std::move(fold));
    }
}

double WrapperEvaluator::operator()(const Mask& mask) {
    std::string key = mask_to_string(mask);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;

    double sum = 0.0;
    for (std::size_t f = 0; f < folds_.size(); ++f) {
        AdtModel model = train_adt_masked(folds_[f].train, mask, boosting_rounds_,
                                          derive_seed(seed_, 0xAD7ULL, f),
                                          &folds_[f].order);
        sum += accuracy(model, folds_[f].test);
    }
    double mean = sum / static_cast<double>(folds_.size());
    cache_.emplace(std::move(key), mean);
    ++misses_;
    return mean;
}

namespace {

void validate_config(const TpsoConfig& config) {
    if (config.initial_swarm < 1)
        throw std::invalid_argument("tpso: initial_swarm must be >= 1");
    if (config.max_swarm <= config.initial_swarm + 3)
        throw std::invalid_argument(
            "tpso: max_swarm must exceed initial_swarm + 3 "
            "(the stop rule needs four trace points)");
    if (config.boosting_rounds < 1)
        throw std::invalid_argument("tpso: boosting_rounds must be >= 1");
    if (config.inner_cv_folds < 2)
        throw std::invalid_argument("tpso: inner_cv_folds must be >= 2");
}

FoldResult failed_fold(std::string reason) {
    FoldResult result;
    result.failed = true;
    result.failure_reason = std::move(reason);
    return result;
}

} // namespace

FoldResult tune_fold(const Dataset& train, const Dataset& test,
                     const TpsoConfig& config, std::uint64_t fold_seed) {
    validate_config(config);
    if (train.n_features() != test.n_features())
        throw std::invalid_argument("tune_fold: train/test schema mismatch");
    for (std::size_t j = 0; j < train.n_features(); ++j)
        if (train.columns[j].name != test.columns[j].name)
            throw std::invalid_argument("tune_fold: train/test schema mismatch");

    if (train.count_label(+1) == 0 || train.count_label(-1) == 0)
        return failed_fold("training fold contains a single class");

    try {
        FeatureScores scores = score_all(train);
        if (!(scores.total > 0.0))
            return failed_fold("no feature discriminates on this training fold");

        WrapperEvaluator evaluator(train, config.inner_cv_folds,
                                   config.boosting_rounds,
                                   derive_seed(fold_seed, 0xE7A1ULL));
        Evaluator evaluate = [&evaluator](const Mask& m) { return evaluator(m); };
        ColumnOrder train_order = ColumnOrder::build(train);
        const std::size_t d = train.n_features();

        FoldResult result;
        TuneTrace& trace = result.trace;
        for (std::size_t n = config.initial_swarm; n <= config.max_swarm; ++n) {
            SwarmConfig swarm = config.inner;
            swarm.n_particles = n;
            swarm.seed = derive_seed(fold_seed, 0x5EACULL, n);
            SearchResult search = pso_search(d, swarm, evaluate);

            AdtModel model =
                train_adt_masked(train, search.best_mask, config.boosting_rounds,
                                 derive_seed(fold_seed, 0xB1ULL, n), &train_order);
            const double b = accuracy(model, test);

            double m1 = 0.0;
            for (std::size_t j = 0; j < d; ++j)
                if (search.best_mask[j]) m1 += scores.scores[j];
            m1 = std::min(m1, scores.total);

            TraceEntry entry;
            entry.swarm_size = n;
            entry.mask = search.best_mask;
            entry.test_accuracy = b;
            entry.m1_over_m2 = m1 / scores.total;
            entry.fitness = fitness(b, m1, scores.total);
            entry.evaluations = search.evaluations;
            trace.entries.push_back(std::move(entry));

            if (local_max_reached(trace, config.stop_rule)) break;
        }

        std::size_t best = 0;
        for (std::size_t i = 1; i < trace.entries.size(); ++i)
            if (trace.entries[i].fitness > trace.entries[best].fitness) best = i;

        const Mask& mask = trace.entries[best].mask;
        AdtModel final_model =
            train_adt_masked(train, mask, config.boosting_rounds,
                             derive_seed(fold_seed, 0xF17ULL), &train_order);

        result.best_entry = best;
        result.selected_mask = mask;
        result.feature_count = popcount(mask);
        result.accuracy = accuracy(final_model, test);
        result.evaluations = evaluator.evaluations();
        return result;
    } catch (const std::exception& e) {
        return failed_fold(std::string("fold aborted: ") + e.what());
    }
}

TpsoResult run_tpso(const Dataset& dataset, const TpsoConfig& config) {
    validate_config(config);
    if (config.k_folds < 2)
        throw std::invalid_argument("tpso: k_folds must be >= 2");

    FoldPlan plan =
        stratified_kfold(dataset, config.k_folds, derive_seed(config.seed, 0xF01DULL));

    TpsoResult result;
    result.per_fold.resize(config.k_folds);
    parallel_for(config.k_folds, config.jobs, [&](std::size_t f) {
        Dataset train = take_rows(dataset, plan.folds[f].first);
        Dataset test = take_rows(dataset, plan.folds[f].second);
        FoldResult fold =
            tune_fold(train, test, config, derive_seed(config.seed, 0xD07ULL, f));
        fold.fold = f;
        result.per_fold[f] = std::move(fold);
    });

    std::vector<double> feature_counts;
    std::vector<double> accuracies;
    for (const auto& fold : result.per_fold) {
        if (fold.failed) continue;
        feature_counts.push_back(static_cast<double>(fold.feature_count));
        accuracies.push_back(fold.accuracy);
        result.evaluations += fold.evaluations;
    }
    result.successful_folds = accuracies.size();
    if (accuracies.empty())
        throw std::runtime_error("tpso: every fold failed (first reason: " +
                                 result.per_fold.front().failure_reason + ")");

    if (accuracies.size() == 1) {
        result.feature_mean = feature_counts.front();
        result.accuracy_mean = accuracies.front();
    } else {
        std::tie(result.feature_mean, result.feature_std) = mean_std(feature_counts);
        std::tie(result.accuracy_mean, result.accuracy_std) = mean_std(accuracies);
    }
    return result;
}

} // namespace tpso
