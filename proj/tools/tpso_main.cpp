#include "tpso/experiment.hpp"
#include "tpso/fscore.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// exit codes: 0 success, 1 runtime/partial failure, 2 invalid invocation
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

tpso::StopRule parse_stop_rule(const std::string& name) {
    if (name == "diminishing_returns") return tpso::StopRule::diminishing_returns;
    if (name == "literal") return tpso::StopRule::literal;
    throw UsageError("unknown stop rule '" + name +
                     "' (expected diminishing_returns or literal)");
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

// --- run ------------------------------------------------------------------

struct RunFlags {
    std::vector<std::string> data;
    std::vector<std::string> labels;
    std::vector<std::string> names;
    std::string methods;
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::string out_dir;
    std::string config_path;
    std::string stop_rule;
    std::optional<std::size_t> initial_swarm, max_swarm, boosting_rounds,
        inner_cv_folds, iterations;
    std::optional<std::size_t> pso_particles, pso_iterations;
    std::optional<std::size_t> ga_population, ga_generations;
};

void expect_keys(const json& j, const std::vector<std::string>& allowed,
                 const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw UsageError("unknown config key '" + key + "' in " + where);
    }
}

// Config file -> ExperimentConfig fields; flags set on the command line win.
void apply_config_file(const std::string& path, tpso::ExperimentConfig& config,
                       bool& seed_set, std::string& out_dir) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config file " + path + " is not valid JSON: " + e.what());
    }
    expect_keys(j, {"datasets", "methods", "folds", "seed", "jobs", "out", "tpso",
                    "pso", "ga"},
                path);

    if (j.contains("datasets")) {
        for (const auto& d : j.at("datasets")) {
            expect_keys(d, {"path", "label", "name"}, path + " datasets[]");
            tpso::DatasetSpec spec;
            spec.path = d.at("path").get<std::string>();
            spec.label = d.at("label").get<std::string>();
            spec.name = d.contains("name") ? d.at("name").get<std::string>()
                                           : fs::path(spec.path).stem().string();
            config.datasets.push_back(std::move(spec));
        }
    }
    if (j.contains("methods")) {
        config.methods.clear();
        for (const auto& m : j.at("methods"))
            config.methods.push_back(tpso::parse_method(m.get<std::string>()));
    }
    if (j.contains("folds")) config.k_folds = j.at("folds").get<std::size_t>();
    if (j.contains("seed")) {
        config.seed = j.at("seed").get<std::uint64_t>();
        seed_set = true;
    }
    if (j.contains("jobs")) config.jobs = j.at("jobs").get<std::size_t>();
    if (j.contains("out")) out_dir = j.at("out").get<std::string>();

    if (j.contains("tpso")) {
        const json& t = j.at("tpso");
        expect_keys(t,
                    {"initial_swarm", "max_swarm", "boosting_rounds", "inner_cv_folds",
                     "stop_rule", "iterations", "c1", "c2", "w_start", "w_end", "v_max",
                     "decode_threshold"},
                    path + " tpso");
        auto& tc = config.tpso;
        if (t.contains("initial_swarm")) tc.initial_swarm = t.at("initial_swarm");
        if (t.contains("max_swarm")) tc.max_swarm = t.at("max_swarm");
        if (t.contains("boosting_rounds")) tc.boosting_rounds = t.at("boosting_rounds");
        if (t.contains("inner_cv_folds")) tc.inner_cv_folds = t.at("inner_cv_folds");
        if (t.contains("stop_rule"))
            tc.stop_rule = parse_stop_rule(t.at("stop_rule").get<std::string>());
        if (t.contains("iterations")) tc.inner.iterations = t.at("iterations");
        if (t.contains("c1")) tc.inner.c1 = t.at("c1");
        if (t.contains("c2")) tc.inner.c2 = t.at("c2");
        if (t.contains("w_start")) tc.inner.w_start = t.at("w_start");
        if (t.contains("w_end")) tc.inner.w_end = t.at("w_end");
        if (t.contains("v_max")) tc.inner.v_max = t.at("v_max");
        if (t.contains("decode_threshold"))
            tc.inner.decode_threshold = t.at("decode_threshold");
    }
    if (j.contains("pso")) {
        const json& p = j.at("pso");
        expect_keys(p,
                    {"particles", "iterations", "c1", "c2", "w_start", "w_end", "v_max",
                     "decode_threshold"},
                    path + " pso");
        auto& pc = config.pso;
        if (p.contains("particles")) pc.n_particles = p.at("particles");
        if (p.contains("iterations")) pc.iterations = p.at("iterations");
        if (p.contains("c1")) pc.c1 = p.at("c1");
        if (p.contains("c2")) pc.c2 = p.at("c2");
        if (p.contains("w_start")) pc.w_start = p.at("w_start");
        if (p.contains("w_end")) pc.w_end = p.at("w_end");
        if (p.contains("v_max")) pc.v_max = p.at("v_max");
        if (p.contains("decode_threshold")) pc.decode_threshold = p.at("decode_threshold");
    }
    if (j.contains("ga")) {
        const json& g = j.at("ga");
        expect_keys(g,
                    {"population", "generations", "crossover_rate", "mutation_rate",
                     "tournament_size", "elitism"},
                    path + " ga");
        auto& gc = config.ga;
        if (g.contains("population")) gc.population = g.at("population");
        if (g.contains("generations")) gc.generations = g.at("generations");
        if (g.contains("crossover_rate")) gc.crossover_rate = g.at("crossover_rate");
        if (g.contains("mutation_rate")) gc.mutation_rate = g.at("mutation_rate");
        if (g.contains("tournament_size")) gc.tournament_size = g.at("tournament_size");
        if (g.contains("elitism")) gc.elitism = g.at("elitism");
    }
}

tpso::Dataset load_dataset(const tpso::DatasetSpec& spec) {
    tpso::SchemaHints hints;
    fs::path sidecar = spec.path + ".schema.json";
    if (fs::exists(sidecar)) hints = tpso::load_schema_hints(sidecar.string());
    tpso::Dataset dataset = tpso::load_csv(spec.path, spec.label, hints);
    dataset.name = spec.name;
    return tpso::impute(dataset);
}

int cmd_run(const RunFlags& flags, const CLI::App& sub) {
    tpso::ExperimentConfig config;
    config.methods = {tpso::Method::tpso};
    bool seed_set = false;
    std::string out_dir = "reports";

    if (!flags.config_path.empty())
        apply_config_file(flags.config_path, config, seed_set, out_dir);

    if (!flags.data.empty()) {
        if (!flags.labels.empty() && flags.labels.size() != 1 &&
            flags.labels.size() != flags.data.size())
            throw UsageError("--label must appear once (applied to all datasets) or "
                             "once per --data");
        if (flags.labels.empty())
            throw UsageError("--label is required with --data");
        if (!flags.names.empty() && flags.names.size() != flags.data.size())
            throw UsageError("--name must appear once per --data");
        config.datasets.clear();
        for (std::size_t i = 0; i < flags.data.size(); ++i) {
            tpso::DatasetSpec spec;
            spec.path = flags.data[i];
            spec.label = flags.labels.size() == 1 ? flags.labels[0] : flags.labels[i];
            spec.name = flags.names.empty() ? fs::path(spec.path).stem().string()
                                            : flags.names[i];
            config.datasets.push_back(std::move(spec));
        }
    }
    if (sub.count("--methods") > 0) {
        config.methods.clear();
        for (const auto& name : split_csv_list(flags.methods))
            config.methods.push_back(tpso::parse_method(name));
    }
    if (sub.count("--folds") > 0) config.k_folds = flags.folds;
    if (sub.count("--seed") > 0) {
        config.seed = flags.seed;
        seed_set = true;
    }
    if (sub.count("--jobs") > 0) config.jobs = flags.jobs;
    if (sub.count("--out") > 0) out_dir = flags.out_dir;
    if (sub.count("--stop-rule") > 0)
        config.tpso.stop_rule = parse_stop_rule(flags.stop_rule);
    if (flags.initial_swarm) config.tpso.initial_swarm = *flags.initial_swarm;
    if (flags.max_swarm) config.tpso.max_swarm = *flags.max_swarm;
    if (flags.boosting_rounds) config.tpso.boosting_rounds = *flags.boosting_rounds;
    if (flags.inner_cv_folds) config.tpso.inner_cv_folds = *flags.inner_cv_folds;
    if (flags.iterations) config.tpso.inner.iterations = *flags.iterations;
    if (flags.pso_particles) config.pso.n_particles = *flags.pso_particles;
    if (flags.pso_iterations) config.pso.iterations = *flags.pso_iterations;
    if (flags.ga_population) config.ga.population = *flags.ga_population;
    if (flags.ga_generations) config.ga.generations = *flags.ga_generations;
    config.out_dir = out_dir;

    if (config.datasets.empty())
        throw UsageError("no datasets given (use --data/--label or a config file)");
    if (config.methods.empty()) throw UsageError("no methods given");
    if (!seed_set) throw UsageError("--seed is required (there is no clock default)");
    if (config.k_folds < 2) throw UsageError("--folds must be at least 2");

    std::vector<tpso::Dataset> datasets;
    std::vector<std::string> load_errors;
    std::vector<tpso::DatasetSpec> loaded_specs;
    for (const auto& spec : config.datasets) {
        try {
            datasets.push_back(load_dataset(spec));
            loaded_specs.push_back(spec);
        } catch (const std::exception& e) {
            load_errors.push_back(spec.name + ": " + e.what());
        }
    }
    config.datasets = loaded_specs;
    if (datasets.empty()) {
        for (const auto& line : load_errors) std::cerr << "error: " << line << "\n";
        return kFailure;
    }

    tpso::ExperimentReport report = tpso::run_experiment(datasets, config);
    report.errors.insert(report.errors.begin(), load_errors.begin(), load_errors.end());

    fs::create_directories(out_dir);
    ordered_json j = tpso::report_to_json(report, config, /*include_timing=*/true);
    write_text_file(fs::path(out_dir) / "report.json", j.dump(2) + "\n");
    std::string markdown = tpso::report_to_markdown(report);
    write_text_file(fs::path(out_dir) / "report.md", markdown);

    std::cout << markdown;
    std::cout << "\nreport written to " << (fs::path(out_dir) / "report.json").string()
              << "\n";
    for (const auto& line : report.errors) std::cerr << "error: " << line << "\n";
    return report.errors.empty() ? kOk : kFailure;
}

// --- compare ----------------------------------------------------------------

int cmd_compare(const std::vector<std::string>& report_paths,
                const std::string& candidate, const std::string& baseline,
                bool one_sided, const std::string& out_dir) {
    tpso::Method candidate_method = tpso::parse_method(candidate);
    std::vector<tpso::Method> baselines;
    if (!baseline.empty()) {
        baselines.push_back(tpso::parse_method(baseline));
    }

    // (dataset, method) -> mean accuracy, later files win on duplicates
    std::map<std::pair<std::string, std::string>, double> accuracy;
    std::set<std::string> methods_seen;
    for (const auto& path : report_paths) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot read report " + path);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw std::runtime_error("report " + path + " is not valid JSON: " +
                                     e.what());
        }
        for (const auto& r : j.at("results")) {
            std::string dataset = r.at("dataset").get<std::string>();
            std::string method = r.at("method").get<std::string>();
            accuracy[{dataset, method}] = r.at("accuracy_mean_pct").get<double>();
            methods_seen.insert(method);
        }
    }
    if (baselines.empty()) {
        for (const auto& name : methods_seen)
            if (name != tpso::method_name(candidate_method))
                baselines.push_back(tpso::parse_method(name));
        if (baselines.empty())
            throw std::runtime_error("reports contain no baseline method to compare "
                                     "against");
    }

    ordered_json rows = ordered_json::array();
    std::vector<std::string> failures;
    for (tpso::Method baseline_method : baselines) {
        std::vector<std::pair<double, double>> pairs;
        std::vector<std::string> datasets;
        for (const auto& [key, cand_acc] : accuracy) {
            if (key.second != tpso::method_name(candidate_method)) continue;
            auto it = accuracy.find({key.first, tpso::method_name(baseline_method)});
            if (it == accuracy.end()) continue;
            pairs.emplace_back(cand_acc, it->second);
            datasets.push_back(key.first);
        }
        if (pairs.size() < 5) {
            failures.push_back("tpso compare " + tpso::method_name(baseline_method) +
                               ": only " + std::to_string(pairs.size()) +
                               " common datasets (need 5)");
            continue;
        }
        try {
            tpso::WilcoxonReport w = tpso::wilcoxon_signed_rank(pairs, one_sided);
            rows.push_back({{"candidate", tpso::method_name(candidate_method)},
                            {"baseline", tpso::method_name(baseline_method)},
                            {"datasets", datasets},
                            {"n_effective", w.n_effective},
                            {"w_plus", w.w_plus},
                            {"w_minus", w.w_minus},
                            {"statistic", w.statistic},
                            {"p_value", w.p_value},
                            {"significant_at_05", w.significant_at_05}});
        } catch (const std::exception& e) {
            failures.push_back("wilcoxon vs " + tpso::method_name(baseline_method) +
                               ": " + e.what());
        }
    }

    ordered_json out;
    out["comparisons"] = rows;
    std::cout << out.dump(2) << "\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file(fs::path(out_dir) / "compare.json", out.dump(2) + "\n");
    }
    for (const auto& line : failures) std::cerr << "error: " << line << "\n";
    if (!failures.empty()) return kFailure;
    if (rows.empty()) {
        std::cerr << "error: no comparison could be computed\n";
        return kFailure;
    }
    return kOk;
}

// --- bench -----------------------------------------------------------------

int cmd_bench(const std::vector<std::size_t>& sizes, std::size_t features,
              std::uint64_t seed, const std::string& out_dir) {
    tpso::BenchResult bench = tpso::run_bench(sizes, features, seed);

    std::ostringstream csv;
    csv << "size,seconds\n";
    for (const auto& point : bench.points)
        csv << point.size << "," << point.seconds << "\n";

    ordered_json j;
    j["n_features"] = bench.n_features;
    ordered_json points = ordered_json::array();
    for (const auto& point : bench.points)
        points.push_back({{"size", point.size}, {"seconds", point.seconds}});
    j["points"] = points;
    j["fit"] = {{"slope", bench.fit.slope},
                {"intercept", bench.fit.intercept},
                {"r_squared", bench.fit.r_squared},
                {"n_points", bench.fit.n_points}};
    std::cout << j.dump(2) << "\n";

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file(fs::path(out_dir) / "bench.csv", csv.str());
        write_text_file(fs::path(out_dir) / "bench.json", j.dump(2) + "\n");
    }
    return kOk;
}

// --- score -----------------------------------------------------------------

int cmd_score(const std::string& data_path, const std::string& label,
              const std::string& out_dir) {
    tpso::DatasetSpec spec;
    spec.path = data_path;
    spec.label = label;
    spec.name = fs::path(data_path).stem().string();
    tpso::Dataset dataset = load_dataset(spec);
    tpso::FeatureScores scores = tpso::score_all(dataset);

    std::vector<std::size_t> order(scores.scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores.scores[a] > scores.scores[b];
    });

    std::ostringstream csv;
    csv << "feature,score\n";
    for (std::size_t j : order)
        csv << dataset.columns[j].name << "," << scores.scores[j] << "\n";

    std::cout << csv.str();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_text_file(fs::path(out_dir) / ("scores_" + spec.name + ".csv"), csv.str());
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tunable-swarm feature selection with an alternating decision tree "
                 "classifier"};
    app.require_subcommand(1);

    RunFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "Run feature-selection experiments");
    run->add_option("--data", run_flags.data, "Dataset CSV path (repeatable)");
    run->add_option("--label", run_flags.labels,
                    "Label column; one value applies to every --data");
    run->add_option("--name", run_flags.names, "Dataset display name (per --data)");
    run->add_option("--methods", run_flags.methods,
                    "Comma-separated: tpso,pso_adt,ga_adt,adt_only");
    run->add_option("--folds", run_flags.folds, "Outer cross-validation folds");
    run->add_option("--seed", run_flags.seed, "Master RNG seed (required)");
    run->add_option("--jobs", run_flags.jobs,
                    "Worker threads for folds (0 = hardware)");
    run->add_option("--out", run_flags.out_dir, "Output directory");
    run->add_option("--config", run_flags.config_path,
                    "JSON config file (flags override it)");
    run->add_option("--stop-rule", run_flags.stop_rule,
                    "diminishing_returns or literal");
    run->add_option("--initial-swarm", run_flags.initial_swarm,
                    "Tuning-loop starting swarm size");
    run->add_option("--max-swarm", run_flags.max_swarm, "Tuning-loop swarm cap");
    run->add_option("--boosting-rounds", run_flags.boosting_rounds,
                    "Boosting rounds per tree");
    run->add_option("--inner-cv-folds", run_flags.inner_cv_folds,
                    "Wrapper-evaluation folds inside a training fold");
    run->add_option("--iterations", run_flags.iterations,
                    "Tuning-loop search iterations per swarm size");
    run->add_option("--pso-particles", run_flags.pso_particles,
                    "Fixed-size PSO baseline particle count");
    run->add_option("--pso-iterations", run_flags.pso_iterations,
                    "Fixed-size PSO baseline iterations");
    run->add_option("--ga-population", run_flags.ga_population,
                    "GA baseline population");
    run->add_option("--ga-generations", run_flags.ga_generations,
                    "GA baseline generations");

    std::vector<std::string> compare_reports;
    std::string compare_candidate = "tpso";
    std::string compare_baseline;
    bool compare_one_sided = false;
    std::string compare_out;
    CLI::App* compare = app.add_subcommand(
        "compare", "Wilcoxon signed-rank comparison across report files");
    compare->add_option("reports", compare_reports, "report.json files")->required();
    compare->add_option("--candidate", compare_candidate, "Candidate method");
    compare->add_option("--baseline", compare_baseline,
                        "Baseline method (default: every other method found)");
    compare->add_flag("--one-sided", compare_one_sided,
                      "One-sided test instead of two-sided");
    compare->add_option("--out", compare_out, "Output directory");

    std::vector<std::size_t> bench_sizes;
    std::size_t bench_features = 15;
    std::uint64_t bench_seed = 0;
    std::string bench_out;
    CLI::App* bench =
        app.add_subcommand("bench", "Time the pipeline on growing synthetic datasets");
    bench->add_option("--sizes", bench_sizes, "Record counts (comma separated)")
        ->required()
        ->delimiter(',');
    bench->add_option("--features", bench_features, "Feature count");
    CLI::Option* bench_seed_opt =
        bench->add_option("--seed", bench_seed, "Master RNG seed (required)");
    bench->add_option("--out", bench_out, "Output directory");

    std::string score_data;
    std::string score_label;
    std::string score_out;
    CLI::App* score =
        app.add_subcommand("score", "Per-feature discrimination scores as CSV");
    score->add_option("--data", score_data, "Dataset CSV path")->required();
    score->add_option("--label", score_label, "Label column")->required();
    score->add_option("--out", score_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (run->parsed()) return cmd_run(run_flags, *run);
        if (compare->parsed())
            return cmd_compare(compare_reports, compare_candidate, compare_baseline,
                               compare_one_sided, compare_out);
        if (bench->parsed()) {
            if (bench_seed_opt->count() == 0)
                throw UsageError("--seed is required (there is no clock default)");
            if (bench_sizes.size() < 3) throw UsageError("--sizes needs at least 3 values");
            return cmd_bench(bench_sizes, bench_features, bench_seed, bench_out);
        }
        if (score->parsed()) return cmd_score(score_data, score_label, score_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}
