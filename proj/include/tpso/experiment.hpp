#pragma once

#include "tpso/dataset.hpp"
#include "tpso/search.hpp"
#include "tpso/stats.hpp"
#include "tpso/tpso.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace tpso {

inline constexpr const char* kVersion = "0.1.0";

enum class Method { tpso, pso_adt, ga_adt, adt_only };

std::string method_name(Method method);
std::string method_label(Method method); // human form for tables
Method parse_method(const std::string& name);

struct DatasetSpec {
    std::string path;
    std::string label;
    std::string name; // defaults to the file stem
};

struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<Method> methods;
    std::size_t k_folds = 10;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::string out_dir;
    TpsoConfig tpso;   // tuning-loop knobs; its seed/k_folds/jobs are overridden per run
    SwarmConfig pso;   // fixed-size PSO baseline
    GaConfig ga;       // GA baseline
    bool one_sided_wilcoxon = false;
};

// One outer fold of any method, in a common shape; `trace` is empty for the
// fixed-size baselines.
struct FoldSummary {
    std::size_t fold = 0;
    bool failed = false;
    std::string failure_reason;
    Mask mask;
    std::size_t feature_count = 0;
    double accuracy = 0.0; // fraction in [0, 1]
    std::size_t evaluations = 0;
    TuneTrace trace;
};

struct MethodRun {
    std::string dataset;
    Method method = Method::tpso;
    std::size_t records = 0;
    std::size_t total_features = 0;
    std::vector<FoldSummary> folds;
    std::size_t successful_folds = 0;
    double accuracy_mean = 0.0; // fraction
    double accuracy_std = 0.0;
    double feature_mean = 0.0;
    double feature_std = 0.0;
    std::size_t evaluations = 0;
    double wall_seconds = 0.0;
};

struct Comparison {
    std::string candidate;
    std::string baseline;
    std::vector<std::string> datasets; // common, both methods successful
    WilcoxonReport report;
};

struct ExperimentReport {
    std::vector<MethodRun> runs;
    std::vector<Comparison> comparisons;
    std::vector<std::string> errors; // one line per (dataset, method) failure
};

// Runs one method on one dataset over the shared stratified fold plan.
// Every method on a given dataset sees identical folds so that accuracies
// pair up; seeds derive from (master seed, dataset name, method).
MethodRun run_method(const Dataset& dataset, Method method,
                     const ExperimentConfig& config);

// Full dataset x method sweep plus the signed-rank comparisons of each
// candidate-vs-baseline pair over per-dataset mean accuracies (emitted when
// at least 5 datasets succeeded for both methods and the tuned method is
// among them).
ExperimentReport run_experiment(const std::vector<Dataset>& datasets,
                                const ExperimentConfig& config);

// include_timing = false leaves out wall-clock fields so two reports from
// identical configs compare byte-for-byte.
nlohmann::ordered_json report_to_json(const ExperimentReport& report,
                                      const ExperimentConfig& config,
                                      bool include_timing = true);
std::string report_to_markdown(const ExperimentReport& report);

// Balanced binary-class generator for the timing harness: the label is the
// majority vote of the first three features thresholded at zero, the
// remaining features are pure Gaussian noise.
Dataset make_synthetic_dataset(std::size_t n_records, std::size_t n_features,
                               std::uint64_t seed);

struct BenchPoint {
    std::size_t size = 0;
    double seconds = 0.0;
};

struct BenchResult {
    std::vector<BenchPoint> points;
    RegressionFit fit;
    std::size_t n_features = 0;
};

// Times a fixed, reduced tuning-loop configuration on synthetic datasets of
// the given record counts and fits seconds against size.
BenchResult run_bench(const std::vector<std::size_t>& sizes,
                      std::size_t n_features, std::uint64_t seed);

} // namespace tpso
