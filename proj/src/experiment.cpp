#include "tpso/experiment.hpp"

#include "tpso/adt.hpp"
#include "tpso/parallel.hpp"
#include "tpso/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace tpso {

namespace {

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

constexpr std::uint64_t kPlanStream = 0xF01D;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

std::string fmt(const char* pattern, double a, double b) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), pattern, a, b);
    return buffer;
}

void aggregate(MethodRun& run) {
    std::vector<double> feature_counts;
    std::vector<double> accuracies;
    for (const auto& fold : run.folds) {
        if (fold.failed) continue;
        feature_counts.push_back(static_cast<double>(fold.feature_count));
        accuracies.push_back(fold.accuracy);
        run.evaluations += fold.evaluations;
    }
    run.successful_folds = accuracies.size();
    if (accuracies.empty()) {
        std::string reason =
            run.folds.empty() ? "no folds" : run.folds.front().failure_reason;
        throw std::runtime_error(method_name(run.method) + " on " + run.dataset +
                                 ": every fold failed (first reason: " + reason + ")");
    }
    if (accuracies.size() == 1) {
        run.feature_mean = feature_counts.front();
        run.accuracy_mean = accuracies.front();
    } else {
        std::tie(run.feature_mean, run.feature_std) = mean_std(feature_counts);
        std::tie(run.accuracy_mean, run.accuracy_std) = mean_std(accuracies);
    }
}

MethodRun run_tpso_method(const Dataset& dataset, const ExperimentConfig& config,
                          std::uint64_t ds_seed) {
    TpsoConfig tc = config.tpso;
    tc.k_folds = config.k_folds;
    tc.seed = ds_seed;
    tc.jobs = config.jobs;
    TpsoResult result = run_tpso(dataset, tc);

    MethodRun run;
    run.dataset = dataset.name;
    run.method = Method::tpso;
    run.records = dataset.n_records;
    run.total_features = dataset.n_features();
    run.folds.reserve(result.per_fold.size());
    for (auto& fold : result.per_fold) {
        FoldSummary summary;
        summary.fold = fold.fold;
        summary.failed = fold.failed;
        summary.failure_reason = fold.failure_reason;
        summary.mask = fold.selected_mask;
        summary.feature_count = fold.feature_count;
        summary.accuracy = fold.accuracy;
        summary.evaluations = fold.evaluations;
        summary.trace = std::move(fold.trace);
        run.folds.push_back(std::move(summary));
    }
    aggregate(run);
    return run;
}

MethodRun run_baseline_method(const Dataset& dataset, Method method,
                              const ExperimentConfig& config, std::uint64_t ds_seed) {
    MethodRun run;
    run.dataset = dataset.name;
    run.method = method;
    run.records = dataset.n_records;
    run.total_features = dataset.n_features();
    run.folds.resize(config.k_folds);

    FoldPlan plan =
        stratified_kfold(dataset, config.k_folds, derive_seed(ds_seed, kPlanStream));
    const std::uint64_t method_tag = static_cast<std::uint64_t>(method) + 0x3E;

    parallel_for(config.k_folds, config.jobs, [&](std::size_t f) {
        FoldSummary& summary = run.folds[f];
        summary.fold = f;
        const std::uint64_t fold_seed = derive_seed(ds_seed, method_tag, f);
        Dataset train = take_rows(dataset, plan.folds[f].first);
        Dataset test = take_rows(dataset, plan.folds[f].second);

        if (train.count_label(+1) == 0 || train.count_label(-1) == 0) {
            summary.failed = true;
            summary.failure_reason = "training fold contains a single class";
            return;
        }
        try {
            const std::size_t d = train.n_features();
            if (method == Method::adt_only) {
                AdtModel model = train_adt(train, config.tpso.boosting_rounds,
                                           derive_seed(fold_seed, 0xB1ULL));
                summary.mask = Mask(d, true);
                summary.feature_count = d;
                summary.accuracy = accuracy(model, test);
                summary.evaluations = 0;
                return;
            }

            WrapperEvaluator evaluator(train, config.tpso.inner_cv_folds,
                                       config.tpso.boosting_rounds,
                                       derive_seed(fold_seed, 0xE7A1ULL));
            Evaluator evaluate = [&evaluator](const Mask& m) { return evaluator(m); };

            SearchResult search;
            if (method == Method::pso_adt) {
                SwarmConfig sc = config.pso;
                sc.seed = derive_seed(fold_seed, 0x50ULL);
                search = pso_search(d, sc, evaluate);
            } else {
                GaConfig gc = config.ga;
                gc.seed = derive_seed(fold_seed, 0x6AULL);
                search = ga_search(d, gc, evaluate);
            }

            ColumnOrder order = ColumnOrder::build(train);
            AdtModel model =
                train_adt_masked(train, search.best_mask, config.tpso.boosting_rounds,
                                 derive_seed(fold_seed, 0xB1ULL), &order);
            summary.mask = search.best_mask;
            summary.feature_count = popcount(search.best_mask);
            summary.accuracy = accuracy(model, test);
            summary.evaluations = evaluator.evaluations();
        } catch (const std::exception& e) {
            summary.failed = true;
            summary.failure_reason = std::string("fold aborted: ") + e.what();
        }
    });

    aggregate(run);
    return run;
}

nlohmann::ordered_json mask_json(const Mask& mask) {
    return mask_to_string(mask);
}

nlohmann::ordered_json trace_json(const TuneTrace& trace) {
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& e : trace.entries) {
        entries.push_back({{"swarm_size", e.swarm_size},
                           {"accuracy_pct", 100.0 * e.test_accuracy},
                           {"m1_over_m2", e.m1_over_m2},
                           {"fitness", e.fitness},
                           {"evaluations", e.evaluations},
                           {"mask", mask_to_string(e.mask)}});
    }
    return entries;
}

std::string stop_rule_name(StopRule rule) {
    return rule == StopRule::diminishing_returns ? "diminishing_returns" : "literal";
}

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buffer[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buffer;
}

} // namespace

std::string method_name(Method method) {
    switch (method) {
        case Method::tpso: return "tpso";
        case Method::pso_adt: return "pso_adt";
        case Method::ga_adt: return "ga_adt";
        case Method::adt_only: return "adt_only";
    }
    throw std::logic_error("unknown method");
}

std::string method_label(Method method) {
    switch (method) {
        case Method::tpso: return "TPSO";
        case Method::pso_adt: return "Standard PSO+ADT";
        case Method::ga_adt: return "GA+ADT";
        case Method::adt_only: return "ADT (all features)";
    }
    throw std::logic_error("unknown method");
}

Method parse_method(const std::string& name) {
    if (name == "tpso") return Method::tpso;
    if (name == "pso_adt") return Method::pso_adt;
    if (name == "ga_adt") return Method::ga_adt;
    if (name == "adt_only") return Method::adt_only;
    throw std::invalid_argument("unknown method '" + name +
                                "' (expected tpso, pso_adt, ga_adt, adt_only)");
}

MethodRun run_method(const Dataset& dataset, Method method,
                     const ExperimentConfig& config) {
    const std::uint64_t ds_seed = derive_seed(config.seed, fnv1a64(dataset.name));
    auto start = std::chrono::steady_clock::now();
    MethodRun run = (method == Method::tpso)
                        ? run_tpso_method(dataset, config, ds_seed)
                        : run_baseline_method(dataset, method, config, ds_seed);
    run.wall_seconds = seconds_since(start);
    return run;
}

ExperimentReport run_experiment(const std::vector<Dataset>& datasets,
                                const ExperimentConfig& config) {
    if (datasets.empty()) throw std::invalid_argument("experiment: no datasets");
    if (config.methods.empty()) throw std::invalid_argument("experiment: no methods");

    ExperimentReport report;
    for (const Dataset& dataset : datasets) {
        for (Method method : config.methods) {
            try {
                report.runs.push_back(run_method(dataset, method, config));
            } catch (const std::exception& e) {
                report.errors.push_back(dataset.name + "/" + method_name(method) +
                                        ": " + e.what());
            }
        }
    }

    // Signed-rank comparisons: the tuned method against each baseline over
    // per-dataset mean accuracies, when at least five datasets have both.
    auto mean_of = [&](const std::string& dataset,
                       Method method) -> const MethodRun* {
        for (const auto& run : report.runs)
            if (run.dataset == dataset && run.method == method) return &run;
        return nullptr;
    };
    bool has_tpso = false;
    for (Method m : config.methods) has_tpso |= (m == Method::tpso);
    if (has_tpso) {
        for (Method baseline : config.methods) {
            if (baseline == Method::tpso) continue;
            Comparison cmp;
            cmp.candidate = method_name(Method::tpso);
            cmp.baseline = method_name(baseline);
            std::vector<std::pair<double, double>> pairs;
            for (const Dataset& dataset : datasets) {
                const MethodRun* a = mean_of(dataset.name, Method::tpso);
                const MethodRun* b = mean_of(dataset.name, baseline);
                if (!a || !b) continue;
                pairs.emplace_back(100.0 * a->accuracy_mean, 100.0 * b->accuracy_mean);
                cmp.datasets.push_back(dataset.name);
            }
            if (pairs.size() < 5) continue;
            try {
                cmp.report = wilcoxon_signed_rank(pairs, config.one_sided_wilcoxon);
                report.comparisons.push_back(std::move(cmp));
            } catch (const std::exception& e) {
                report.errors.push_back("wilcoxon tpso vs " + method_name(baseline) +
                                        ": " + e.what());
            }
        }
    }
    return report;
}

nlohmann::ordered_json report_to_json(const ExperimentReport& report,
                                      const ExperimentConfig& config,
                                      bool include_timing) {
    nlohmann::ordered_json j;
    j["tool"] = "tpso";
    j["version"] = kVersion;
    if (include_timing) j["generated_at"] = utc_timestamp();

    nlohmann::ordered_json cfg;
    cfg["seed"] = config.seed;
    cfg["folds"] = config.k_folds;
    nlohmann::ordered_json methods = nlohmann::ordered_json::array();
    for (Method m : config.methods) methods.push_back(method_name(m));
    cfg["methods"] = methods;
    nlohmann::ordered_json ds = nlohmann::ordered_json::array();
    for (const auto& spec : config.datasets)
        ds.push_back({{"name", spec.name}, {"path", spec.path}, {"label", spec.label}});
    cfg["datasets"] = ds;
    cfg["tpso"] = {{"initial_swarm", config.tpso.initial_swarm},
                   {"max_swarm", config.tpso.max_swarm},
                   {"boosting_rounds", config.tpso.boosting_rounds},
                   {"inner_cv_folds", config.tpso.inner_cv_folds},
                   {"stop_rule", stop_rule_name(config.tpso.stop_rule)},
                   {"iterations", config.tpso.inner.iterations},
                   {"c1", config.tpso.inner.c1},
                   {"c2", config.tpso.inner.c2},
                   {"w_start", config.tpso.inner.w_start},
                   {"w_end", config.tpso.inner.w_end},
                   {"v_max", config.tpso.inner.v_max},
                   {"decode_threshold", config.tpso.inner.decode_threshold}};
    cfg["pso"] = {{"particles", config.pso.n_particles},
                  {"iterations", config.pso.iterations},
                  {"c1", config.pso.c1},
                  {"c2", config.pso.c2},
                  {"w_start", config.pso.w_start},
                  {"w_end", config.pso.w_end},
                  {"v_max", config.pso.v_max},
                  {"decode_threshold", config.pso.decode_threshold}};
    cfg["ga"] = {{"population", config.ga.population},
                 {"generations", config.ga.generations},
                 {"crossover_rate", config.ga.crossover_rate},
                 {"mutation_rate", config.ga.mutation_rate},
                 {"tournament_size", config.ga.tournament_size},
                 {"elitism", config.ga.elitism}};
    j["config"] = cfg;

    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (const auto& run : report.runs) {
        nlohmann::ordered_json r;
        r["dataset"] = run.dataset;
        r["method"] = method_name(run.method);
        r["records"] = run.records;
        r["total_features"] = run.total_features;
        r["successful_folds"] = run.successful_folds;
        r["accuracy_mean_pct"] = 100.0 * run.accuracy_mean;
        r["accuracy_std_pct"] = 100.0 * run.accuracy_std;
        r["feature_mean"] = run.feature_mean;
        r["feature_std"] = run.feature_std;
        r["evaluations"] = run.evaluations;
        if (include_timing) r["wall_seconds"] = run.wall_seconds;
        nlohmann::ordered_json folds = nlohmann::ordered_json::array();
        for (const auto& fold : run.folds) {
            nlohmann::ordered_json fj;
            fj["fold"] = fold.fold;
            if (fold.failed) {
                fj["failed"] = true;
                fj["reason"] = fold.failure_reason;
            } else {
                fj["accuracy_pct"] = 100.0 * fold.accuracy;
                fj["features"] = fold.feature_count;
                fj["mask"] = mask_json(fold.mask);
                fj["evaluations"] = fold.evaluations;
                if (!fold.trace.entries.empty()) fj["trace"] = trace_json(fold.trace);
            }
            folds.push_back(std::move(fj));
        }
        r["per_fold"] = folds;
        results.push_back(std::move(r));
    }
    j["results"] = results;

    nlohmann::ordered_json comparisons = nlohmann::ordered_json::array();
    for (const auto& cmp : report.comparisons) {
        comparisons.push_back({{"candidate", cmp.candidate},
                               {"baseline", cmp.baseline},
                               {"datasets", cmp.datasets},
                               {"n_effective", cmp.report.n_effective},
                               {"w_plus", cmp.report.w_plus},
                               {"w_minus", cmp.report.w_minus},
                               {"statistic", cmp.report.statistic},
                               {"p_value", cmp.report.p_value},
                               {"significant_at_05", cmp.report.significant_at_05}});
    }
    j["comparisons"] = comparisons;
    j["errors"] = report.errors;
    return j;
}

std::string report_to_markdown(const ExperimentReport& report) {
    // Column order fixed by method enum; only methods that actually ran appear.
    std::vector<Method> methods;
    std::vector<std::string> datasets;
    for (const auto& run : report.runs) {
        if (std::find(methods.begin(), methods.end(), run.method) == methods.end())
            methods.push_back(run.method);
        if (std::find(datasets.begin(), datasets.end(), run.dataset) == datasets.end())
            datasets.push_back(run.dataset);
    }
    std::sort(methods.begin(), methods.end());

    auto find_run = [&](const std::string& dataset, Method method) -> const MethodRun* {
        for (const auto& run : report.runs)
            if (run.dataset == dataset && run.method == method) return &run;
        return nullptr;
    };

    std::ostringstream md;
    md << "# Feature-selection experiment report\n\n";

    md << "## Accuracy over folds, mean +/- std (%)\n\n";
    md << "| Dataset | Records | Features |";
    for (Method m : methods) md << " " << method_label(m) << " |";
    md << "\n|---|---|---|";
    for (std::size_t i = 0; i < methods.size(); ++i) md << "---|";
    md << "\n";
    for (const auto& name : datasets) {
        const MethodRun* any = nullptr;
        for (Method m : methods)
            if ((any = find_run(name, m)) != nullptr) break;
        md << "| " << name << " | " << (any ? any->records : 0) << " | "
           << (any ? any->total_features : 0) << " |";
        for (Method m : methods) {
            const MethodRun* run = find_run(name, m);
            md << " "
               << (run ? fmt("%.2f +/- %.2f", 100.0 * run->accuracy_mean,
                             100.0 * run->accuracy_std)
                       : std::string("-"))
               << " |";
        }
        md << "\n";
    }

    bool any_selection = false;
    for (Method m : methods) any_selection |= (m != Method::adt_only);
    if (any_selection) {
        md << "\n## Selected features, mean +/- std\n\n";
        md << "| Dataset | Total |";
        for (Method m : methods)
            if (m != Method::adt_only) md << " " << method_label(m) << " |";
        md << "\n|---|---|";
        for (Method m : methods)
            if (m != Method::adt_only) md << "---|";
        md << "\n";
        for (const auto& name : datasets) {
            const MethodRun* any = nullptr;
            for (Method m : methods)
                if ((any = find_run(name, m)) != nullptr) break;
            md << "| " << name << " | " << (any ? any->total_features : 0) << " |";
            for (Method m : methods) {
                if (m == Method::adt_only) continue;
                const MethodRun* run = find_run(name, m);
                md << " "
                   << (run ? fmt("%.1f +/- %.2f", run->feature_mean, run->feature_std)
                           : std::string("-"))
                   << " |";
            }
            md << "\n";
        }
    }

    if (!report.comparisons.empty()) {
        md << "\n## Wilcoxon signed-rank on per-dataset accuracies\n\n";
        md << "| Candidate | Baseline | n | Rank sums (+, -) | Statistic | p-value | "
              "Significant (alpha=0.05) |\n";
        md << "|---|---|---|---|---|---|---|\n";
        for (const auto& cmp : report.comparisons) {
            char sums[64];
            std::snprintf(sums, sizeof(sums), "%.1f, %.1f", cmp.report.w_plus,
                          cmp.report.w_minus);
            char pbuf[32];
            std::snprintf(pbuf, sizeof(pbuf), "%.4f", cmp.report.p_value);
            md << "| " << cmp.candidate << " | " << cmp.baseline << " | "
               << cmp.report.n_effective << " | " << sums << " | "
               << cmp.report.statistic << " | " << pbuf << " | "
               << (cmp.report.significant_at_05 ? "yes" : "no") << " |\n";
        }
    }

    if (!report.errors.empty()) {
        md << "\n## Failures\n\n";
        for (const auto& line : report.errors) md << "- " << line << "\n";
    }
    return md.str();
}

Dataset make_synthetic_dataset(std::size_t n_records, std::size_t n_features,
                               std::uint64_t seed) {
    if (n_records < 8)
        throw std::invalid_argument("synthetic dataset: need at least 8 records");
    if (n_features < 4)
        throw std::invalid_argument("synthetic dataset: need at least 4 features");

    constexpr std::size_t kInformative = 3;
    for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt == 1000)
            throw std::runtime_error("synthetic dataset: generation kept collapsing "
                                     "to a single class");
        Rng rng(derive_seed(seed, 0xDA7AULL, attempt));
        std::vector<FeatureColumn> columns(n_features);
        for (std::size_t j = 0; j < n_features; ++j) {
            columns[j].name = "f" + std::to_string(j);
            columns[j].kind = ColumnKind::numeric;
            columns[j].values.resize(n_records);
            columns[j].missing.assign(n_records, 0);
        }
        std::vector<std::int8_t> labels(n_records);
        for (std::size_t i = 0; i < n_records; ++i) {
            std::size_t votes = 0;
            for (std::size_t j = 0; j < kInformative; ++j) {
                double v = rng.normal();
                columns[j].values[i] = v;
                if (v > 0.0) ++votes;
            }
            for (std::size_t j = kInformative; j < n_features; ++j)
                columns[j].values[i] = rng.normal();
            labels[i] = votes >= 2 ? std::int8_t{+1} : std::int8_t{-1};
        }
        std::size_t positives = 0;
        for (std::int8_t label : labels) positives += (label > 0);
        if (positives < 2 || n_records - positives < 2) continue;
        return make_dataset("synthetic" + std::to_string(n_records),
                            std::move(columns), std::move(labels), "neg", "pos");
    }
}

BenchResult run_bench(const std::vector<std::size_t>& sizes, std::size_t n_features,
                      std::uint64_t seed) {
    if (sizes.size() < 3)
        throw std::invalid_argument("bench: need at least 3 sizes");

    BenchResult result;
    result.n_features = n_features;
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t size : sizes) {
        Dataset dataset = make_synthetic_dataset(size, n_features, derive_seed(seed, size));

        // fixed small configuration so the harness finishes quickly and the
        // workload scales only with the record count
        TpsoConfig config;
        config.k_folds = 3;
        config.initial_swarm = 5;
        config.max_swarm = 10;
        config.boosting_rounds = 5;
        config.inner_cv_folds = 3;
        config.inner.iterations = 10;
        config.seed = derive_seed(seed, 0xBE7CULL, size);
        config.jobs = 1;

        auto start = std::chrono::steady_clock::now();
        (void)run_tpso(dataset, config);
        double elapsed = seconds_since(start);
        result.points.push_back({size, elapsed});
        x.push_back(static_cast<double>(size));
        y.push_back(elapsed);
    }
    result.fit = linear_regression(x, y);
    return result;
}

} // namespace tpso
