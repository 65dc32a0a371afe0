#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace tpso {

enum class ColumnKind { numeric, categorical };

// A boolean feature subset; one bit per feature column.
using Mask = std::vector<bool>;

std::string mask_to_string(const Mask& mask);
Mask mask_from_string(const std::string& bits);
std::size_t popcount(const Mask& mask);

struct FeatureColumn {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::vector<double> values;            // categorical columns store integer codes
    std::vector<std::uint8_t> missing;     // 1 where the cell was missing
    std::vector<std::string> categories;   // code -> original token, categorical only
};

// Column-typed records with a binary decision class. Labels are stored as
// +1/-1; the lexicographically first class tag maps to -1.
struct Dataset {
    std::string name;
    std::vector<FeatureColumn> columns;
    std::vector<std::int8_t> labels;
    std::string positive_label;
    std::string negative_label;
    std::size_t n_records = 0;

    std::size_t n_features() const { return columns.size(); }
    std::size_t count_label(std::int8_t which) const;
};

// Validating constructor for programmatic datasets: checks column shapes,
// unique names, exactly two classes with at least two records each.
Dataset make_dataset(std::string name, std::vector<FeatureColumn> columns,
                     std::vector<std::int8_t> labels, std::string negative_label,
                     std::string positive_label);

using SchemaHints = std::map<std::string, ColumnKind>;

// CSV ingestion. First row is the header; "?" or an empty cell is missing.
// The label column must hold exactly two distinct non-missing values and is
// removed from the feature columns.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const SchemaHints& hints = {});

// Sidecar schema file: JSON object mapping column name -> "numeric"|"categorical".
SchemaHints load_schema_hints(const std::string& path);

// Median (numeric) / mode (categorical) imputation; clears missing flags.
Dataset impute(const Dataset& dataset);

struct FoldPlan {
    std::size_t k = 0;
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> folds; // (train, test)
    std::uint64_t seed = 0;
};

// Within each class, indices are shuffled by the seeded RNG and dealt
// round-robin to folds, so per-fold class counts differ from floor(n_c/k) by
// at most one.
FoldPlan stratified_kfold(const Dataset& dataset, std::size_t k, std::uint64_t seed);

// Column projection; keeps records and labels, preserves column order.
Dataset project(const Dataset& dataset, const Mask& mask);

// Row subset in the given order. Class-count invariants are not re-checked:
// a fold of a valid dataset may hold a single class.
Dataset take_rows(const Dataset& dataset, const std::vector<std::size_t>& rows);

} // namespace tpso
