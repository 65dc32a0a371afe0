#pragma once

#include "tpso/adt.hpp"
#include "tpso/dataset.hpp"
#include "tpso/fscore.hpp"
#include "tpso/search.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace tpso {

// Composite selection fitness: equal-weight blend of classifier accuracy and
// the selected subset's share of the total discrimination score.
double fitness(double accuracy, double m1, double m2);

enum class StopRule {
    // x = swarm size, y = fitness: stop once the fitness gains over the last
    // four trace points shrink strictly (concave tail / local maximum).
    diminishing_returns,
    // x = fitness, y = swarm size: the same conditions applied to the
    // reciprocal increments 1/dV; a zero fitness increment terminates
    // immediately (the derivative diverges).
    literal,
};

struct TraceEntry {
    std::size_t swarm_size = 0; // N_i
    Mask mask;                  // best mask found by the size-N search
    double test_accuracy = 0.0; // B_i, fraction in [0, 1]
    double m1_over_m2 = 0.0;    // subset score share in [0, 1]
    double fitness = 0.0;       // V_i
    std::size_t evaluations = 0; // distinct masks evaluated by this search
};

struct TuneTrace {
    std::vector<TraceEntry> entries;
};

// True once the last four fitness values satisfy the local-maximum
// conditions; always false with fewer than four entries.
bool local_max_reached(const std::vector<double>& fitness_values,
                       StopRule rule = StopRule::diminishing_returns);
bool local_max_reached(const TuneTrace& trace,
                       StopRule rule = StopRule::diminishing_returns);

struct TpsoConfig {
    std::size_t initial_swarm = 5;
    std::size_t max_swarm = 50; // cap when the stop rule never fires
    SwarmConfig inner;          // template; n_particles and seed are set per step
    std::size_t k_folds = 10;
    std::size_t boosting_rounds = 10;
    std::size_t inner_cv_folds = 5; // wrapper evaluation folds inside a training fold
    StopRule stop_rule = StopRule::diminishing_returns;
    std::uint64_t seed = 0;
    std::size_t jobs = 1; // fold-level worker threads; 0 = hardware concurrency
};

struct FoldResult {
    std::size_t fold = 0;
    bool failed = false;
    std::string failure_reason;
    Mask selected_mask;
    std::size_t feature_count = 0; // F_k
    double accuracy = 0.0;         // A_k, fraction in [0, 1]
    std::size_t best_entry = 0;    // index into trace.entries
    TuneTrace trace;
    std::size_t evaluations = 0; // distinct masks evaluated across the whole fold
};

struct TpsoResult {
    std::vector<FoldResult> per_fold;
    std::size_t successful_folds = 0;
    double feature_mean = 0.0; // FM
    double feature_std = 0.0;  // FS
    double accuracy_mean = 0.0; // AM, fraction in [0, 1]
    double accuracy_std = 0.0;  // AS
    std::size_t evaluations = 0;
};

// Wrapper evaluation of a candidate mask: mean ADT accuracy over a stratified
// cross-validation restricted to the training fold. One instance serves a
// whole outer fold; results are cached per distinct mask so successive swarm
// sizes re-probing the same subsets cost nothing. Falls back to
// resubstitution (train = test = whole fold) when a class is too small to
// split.
class WrapperEvaluator {
public:
    WrapperEvaluator(const Dataset& train, std::size_t inner_folds,
                     std::size_t boosting_rounds, std::uint64_t seed);

    double operator()(const Mask& mask);
    std::size_t evaluations() const { return misses_; }

    WrapperEvaluator(const WrapperEvaluator&) = delete;
    WrapperEvaluator& operator=(const WrapperEvaluator&) = delete;

private:
    struct InnerFold {
        Dataset train;
        Dataset test;
        ColumnOrder order;
    };
    std::vector<InnerFold> folds_;
    std::size_t boosting_rounds_;
    std::uint64_t seed_;
    std::unordered_map<std::string, double> cache_;
    std::size_t misses_ = 0;
};

// Swarm-size tuning loop for one train/test fold: grow the swarm one particle
// at a time from initial_swarm, search a mask per size, score it on the test
// part, and stop at a fitness local maximum or at max_swarm. The reported
// mask is the trace entry with maximal fitness (ties keep the smaller swarm);
// the classifier is retrained on it for the fold accuracy. Degenerate folds
// are marked failed instead of throwing.
FoldResult tune_fold(const Dataset& train, const Dataset& test,
                     const TpsoConfig& config, std::uint64_t fold_seed);

// Stratified k-fold driver around tune_fold. Aggregates feature-count and
// accuracy mean/std (sample std, k-1 divisor) over successful folds; throws
// if every fold failed. Deterministic for a fixed seed, independent of jobs.
TpsoResult run_tpso(const Dataset& dataset, const TpsoConfig& config);

} // namespace tpso
