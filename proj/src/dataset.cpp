#include "tpso/dataset.hpp"
#include "tpso/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace tpso {

std::string mask_to_string(const Mask& mask) {
    std::string s(mask.size(), '0');
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) s[i] = '1';
    return s;
}

Mask mask_from_string(const std::string& bits) {
    Mask m(bits.size(), false);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1') m[i] = true;
        else if (bits[i] != '0') throw std::invalid_argument("mask string must contain only 0/1");
    }
    return m;
}

std::size_t popcount(const Mask& mask) {
    std::size_t n = 0;
    for (bool b : mask) n += b ? 1 : 0;
    return n;
}

std::size_t Dataset::count_label(std::int8_t which) const {
    std::size_t n = 0;
    for (auto l : labels) n += (l == which) ? 1 : 0;
    return n;
}

namespace {

void check_shapes(const Dataset& d) {
    if (d.labels.size() != d.n_records)
        throw std::invalid_argument("dataset '" + d.name + "': label count does not match record count");
    std::set<std::string> names;
    for (const auto& c : d.columns) {
        if (c.values.size() != d.n_records || c.missing.size() != d.n_records)
            throw std::invalid_argument("dataset '" + d.name + "': column '" + c.name +
                                        "' length does not match record count");
        if (!names.insert(c.name).second)
            throw std::invalid_argument("dataset '" + d.name + "': duplicate column name '" + c.name + "'");
    }
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool is_missing_token(const std::string& t) { return t.empty() || t == "?"; }

bool parse_double(const std::string& t, double& out) {
    if (t.empty()) return false;
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE) return false;
    if (!std::isfinite(v)) return false;
    out = v;
    return true;
}

// Minimal RFC-ish CSV row split: commas, double-quote fields, "" escapes.
std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') { cur += '"'; ++i; }
                else quoted = false;
            } else cur += ch;
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    cells.push_back(trim(cur));
    return cells;
}

} // namespace

Dataset make_dataset(std::string name, std::vector<FeatureColumn> columns,
                     std::vector<std::int8_t> labels, std::string negative_label,
                     std::string positive_label) {
    Dataset d;
    d.name = std::move(name);
    d.columns = std::move(columns);
    d.labels = std::move(labels);
    d.negative_label = std::move(negative_label);
    d.positive_label = std::move(positive_label);
    d.n_records = d.labels.size();
    if (d.n_records == 0) throw std::invalid_argument("dataset '" + d.name + "': empty dataset");
    if (d.columns.empty()) throw std::invalid_argument("dataset '" + d.name + "': no feature columns");
    check_shapes(d);
    std::size_t pos = d.count_label(+1), neg = d.count_label(-1);
    if (pos + neg != d.n_records)
        throw std::invalid_argument("dataset '" + d.name + "': labels must be +1 or -1");
    if (pos < 2 || neg < 2)
        throw std::invalid_argument("dataset '" + d.name + "': each class needs at least 2 records");
    return d;
}

SchemaHints load_schema_hints(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("schema file not found: " + path);
    nlohmann::json j;
    in >> j;
    if (!j.is_object()) throw std::runtime_error("schema file must be a JSON object: " + path);
    SchemaHints hints;
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::string kind = it.value().get<std::string>();
        if (kind == "numeric") hints[it.key()] = ColumnKind::numeric;
        else if (kind == "categorical") hints[it.key()] = ColumnKind::categorical;
        else throw std::runtime_error("schema file: unknown kind '" + kind + "' for column '" + it.key() + "'");
    }
    return hints;
}

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const SchemaHints& hints) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("file not found: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    std::vector<std::string> header = split_csv_row(line);

    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) { label_idx = i; break; }
    if (label_idx == header.size())
        throw std::runtime_error(path + ": label column '" + label_column + "' not found");

    std::vector<std::vector<std::string>> cells(header.size());
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> row = split_csv_row(line);
        if (row.size() != header.size()) {
            std::ostringstream msg;
            msg << path << ": row " << row_no << " has " << row.size()
                << " cells, expected " << header.size();
            throw std::runtime_error(msg.str());
        }
        for (std::size_t i = 0; i < row.size(); ++i) cells[i].push_back(std::move(row[i]));
    }
    std::size_t n = cells.empty() ? 0 : cells[0].size();
    if (n == 0) throw std::runtime_error(path + ": empty dataset");
    if (header.size() < 2) throw std::runtime_error(path + ": no feature columns");

    // labels first: exactly two distinct non-missing values, lexicographically
    // first tag -> -1
    std::vector<std::string> label_values;
    for (std::size_t r = 0; r < n; ++r) {
        const std::string& t = cells[label_idx][r];
        if (is_missing_token(t)) {
            std::ostringstream msg;
            msg << path << ": missing value in label column at data row " << (r + 1);
            throw std::runtime_error(msg.str());
        }
        label_values.push_back(t);
    }
    std::set<std::string> distinct(label_values.begin(), label_values.end());
    if (distinct.size() != 2) {
        std::ostringstream msg;
        msg << path << ": label column '" << label_column << "' has " << distinct.size()
            << " distinct values, expected exactly 2";
        throw std::runtime_error(msg.str());
    }
    std::string negative = *distinct.begin();
    std::string positive = *std::next(distinct.begin());
    std::vector<std::int8_t> labels(n);
    for (std::size_t r = 0; r < n; ++r) labels[r] = (label_values[r] == positive) ? +1 : -1;

    std::vector<FeatureColumn> columns;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == label_idx) continue;
        FeatureColumn col;
        col.name = header[c];
        col.values.resize(n, 0.0);
        col.missing.resize(n, 0);

        auto hint = hints.find(col.name);
        bool forced_categorical = hint != hints.end() && hint->second == ColumnKind::categorical;
        bool forced_numeric = hint != hints.end() && hint->second == ColumnKind::numeric;

        bool numeric = !forced_categorical;
        if (numeric) {
            for (std::size_t r = 0; r < n && numeric; ++r) {
                const std::string& t = cells[c][r];
                if (is_missing_token(t)) continue;
                double v;
                if (!parse_double(t, v)) {
                    if (forced_numeric) {
                        std::ostringstream msg;
                        msg << path << ": column '" << col.name << "' hinted numeric but row "
                            << (r + 1) << " holds '" << t << "'";
                        throw std::runtime_error(msg.str());
                    }
                    numeric = false;
                }
            }
        }

        if (numeric) {
            col.kind = ColumnKind::numeric;
            for (std::size_t r = 0; r < n; ++r) {
                const std::string& t = cells[c][r];
                if (is_missing_token(t)) { col.missing[r] = 1; continue; }
                parse_double(t, col.values[r]);
            }
        } else {
            col.kind = ColumnKind::categorical;
            std::unordered_map<std::string, double> codes; // first-appearance order
            for (std::size_t r = 0; r < n; ++r) {
                const std::string& t = cells[c][r];
                if (is_missing_token(t)) { col.missing[r] = 1; continue; }
                auto it = codes.find(t);
                if (it == codes.end()) {
                    double code = static_cast<double>(col.categories.size());
                    it = codes.emplace(t, code).first;
                    col.categories.push_back(t);
                }
                col.values[r] = it->second;
            }
        }
        columns.push_back(std::move(col));
    }

    std::string name = path;
    std::size_t slash = name.find_last_of("/\\");
    if (slash != std::string::npos) name = name.substr(slash + 1);
    std::size_t dot = name.find_last_of('.');
    if (dot != std::string::npos && dot > 0) name = name.substr(0, dot);

    return make_dataset(std::move(name), std::move(columns), std::move(labels),
                        std::move(negative), std::move(positive));
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

Dataset impute(const Dataset& dataset) {
    Dataset out = dataset;
    for (auto& col : out.columns) {
        bool any_missing = false;
        std::vector<double> present;
        for (std::size_t r = 0; r < out.n_records; ++r) {
            if (col.missing[r]) any_missing = true;
            else present.push_back(col.values[r]);
        }
        if (!any_missing) continue;
        if (present.empty())
            throw std::runtime_error("impute: column '" + col.name + "' is entirely missing");

        double fill;
        if (col.kind == ColumnKind::numeric) {
            fill = median_of(std::move(present));
        } else {
            // mode; ties resolved to the smallest code
            std::vector<std::size_t> freq(col.categories.size(), 0);
            for (double v : present) freq[static_cast<std::size_t>(v)] += 1;
            std::size_t best = 0;
            for (std::size_t i = 1; i < freq.size(); ++i)
                if (freq[i] > freq[best]) best = i;
            fill = static_cast<double>(best);
        }
        for (std::size_t r = 0; r < out.n_records; ++r) {
            if (col.missing[r]) {
                col.values[r] = fill;
                col.missing[r] = 0;
            }
        }
    }
    return out;
}

FoldPlan stratified_kfold(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");

    std::vector<std::size_t> pos_idx, neg_idx;
    for (std::size_t r = 0; r < dataset.n_records; ++r)
        (dataset.labels[r] > 0 ? pos_idx : neg_idx).push_back(r);
    if (pos_idx.size() < k || neg_idx.size() < k) {
        std::ostringstream msg;
        msg << "stratified_kfold: a class has fewer than k=" << k << " records ("
            << pos_idx.size() << " positive, " << neg_idx.size() << " negative)";
        throw std::invalid_argument(msg.str());
    }

    Rng pos_rng(derive_seed(seed, 1));
    Rng neg_rng(derive_seed(seed, 2));
    pos_rng.shuffle(pos_idx);
    neg_rng.shuffle(neg_idx);

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    std::vector<std::vector<std::size_t>> test_sets(k);
    for (std::size_t i = 0; i < neg_idx.size(); ++i) test_sets[i % k].push_back(neg_idx[i]);
    for (std::size_t i = 0; i < pos_idx.size(); ++i) test_sets[i % k].push_back(pos_idx[i]);

    std::vector<std::size_t> fold_of(dataset.n_records);
    for (std::size_t f = 0; f < k; ++f) {
        std::sort(test_sets[f].begin(), test_sets[f].end());
        for (std::size_t idx : test_sets[f]) fold_of[idx] = f;
    }
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train;
        train.reserve(dataset.n_records - test_sets[f].size());
        for (std::size_t r = 0; r < dataset.n_records; ++r)
            if (fold_of[r] != f) train.push_back(r);
        plan.folds.emplace_back(std::move(train), std::move(test_sets[f]));
    }
    return plan;
}

Dataset project(const Dataset& dataset, const Mask& mask) {
    if (mask.size() != dataset.n_features())
        throw std::invalid_argument("project: mask length does not match feature count");
    if (popcount(mask) == 0) throw std::invalid_argument("project: all-zero mask");

    Dataset out;
    out.name = dataset.name;
    out.labels = dataset.labels;
    out.positive_label = dataset.positive_label;
    out.negative_label = dataset.negative_label;
    out.n_records = dataset.n_records;
    for (std::size_t c = 0; c < mask.size(); ++c)
        if (mask[c]) out.columns.push_back(dataset.columns[c]);
    return out;
}

Dataset take_rows(const Dataset& dataset, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.name = dataset.name;
    out.positive_label = dataset.positive_label;
    out.negative_label = dataset.negative_label;
    out.n_records = rows.size();
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) {
        if (r >= dataset.n_records) throw std::out_of_range("take_rows: row index out of range");
        out.labels.push_back(dataset.labels[r]);
    }
    out.columns.reserve(dataset.columns.size());
    for (const auto& col : dataset.columns) {
        FeatureColumn c;
        c.name = col.name;
        c.kind = col.kind;
        c.categories = col.categories;
        c.values.reserve(rows.size());
        c.missing.reserve(rows.size());
        for (std::size_t r : rows) {
            c.values.push_back(col.values[r]);
            c.missing.push_back(col.missing[r]);
        }
        out.columns.push_back(std::move(c));
    }
    return out;
}

} // namespace tpso
