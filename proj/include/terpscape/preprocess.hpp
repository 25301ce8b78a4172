#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/dataset.hpp"
#include "terpscape/feature_matrix.hpp"
#include "terpscape/rng.hpp"

namespace terpscape {

struct ColumnTransform {
    double median = 0.0;
    double mean = 0.0;
    double stddev = 1.0;
    bool scaled = false;      // standardization applied to this column
    bool degenerate = false;  // constant in training data: centered only
    bool imputed_empty = false;  // no observed training values: median forced to 0
};

struct SplitDataset {
    FeatureMatrix train;
    FeatureMatrix test;
    std::vector<int> train_labels;
    std::vector<int> test_labels;
    std::vector<ColumnTransform> transform;  // empty until imputer+scaler fitted
    uint64_t seed = 0;
    std::vector<std::string> warnings;
};

// Uniform shuffle split; train size = round(ratio * n), clamped so both sides
// stay non-empty.
inline SplitDataset train_test_split(const FeatureMatrix& fm, const std::vector<int>& labels,
                                     double ratio, uint64_t seed) {
    const size_t n = fm.n_rows();
    if (n < 2) throw DataError("train_test_split: need at least 2 rows");
    if (labels.size() != n)
        throw DataError("train_test_split: labels length does not match row count");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw UsageError("train_test_split: ratio must be in (0,1)");

    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(seed);
    rng.shuffle(perm);

    size_t train_n = static_cast<size_t>(std::llround(ratio * static_cast<double>(n)));
    train_n = std::min(std::max<size_t>(train_n, 1), n - 1);

    std::vector<size_t> train_idx(perm.begin(), perm.begin() + train_n);
    std::vector<size_t> test_idx(perm.begin() + train_n, perm.end());

    SplitDataset ds;
    ds.seed = seed;
    ds.train = fm.select_rows(train_idx);
    ds.test = fm.select_rows(test_idx);
    for (size_t i : train_idx) ds.train_labels.push_back(labels[i]);
    for (size_t i : test_idx) ds.test_labels.push_back(labels[i]);
    return ds;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t m = v.size() / 2;
    if (v.size() % 2 == 1) return v[m];
    return 0.5 * (v[m - 1] + v[m]);
}

// Fills every missing train/test value with the median of the observed
// training values of that column.
inline SplitDataset fit_apply_imputer(SplitDataset ds) {
    const size_t d = ds.train.n_cols();
    if (ds.transform.empty()) ds.transform.resize(d);
    for (size_t j = 0; j < d; ++j) {
        std::vector<double> observed;
        for (size_t i = 0; i < ds.train.n_rows(); ++i) {
            double v = ds.train.values.at(i, j);
            if (!is_missing(v)) observed.push_back(v);
        }
        ColumnTransform& t = ds.transform[j];
        if (observed.empty()) {
            t.median = 0.0;
            t.imputed_empty = true;
            ds.warnings.push_back("column '" + ds.train.columns[j].name +
                                  "' has no observed training values; imputing 0");
        } else {
            t.median = median_of(std::move(observed));
        }
        for (size_t i = 0; i < ds.train.n_rows(); ++i)
            if (is_missing(ds.train.values.at(i, j))) ds.train.values.at(i, j) = t.median;
        for (size_t i = 0; i < ds.test.n_rows(); ++i)
            if (is_missing(ds.test.values.at(i, j))) ds.test.values.at(i, j) = t.median;
    }
    return ds;
}

// Standardizes with training mean and population std. Binary flag columns are
// left untouched; encoded-categorical columns are scaled like continuous ones
// (only the 0/1 dummies are exempt from scaling).
inline SplitDataset fit_apply_scaler(SplitDataset ds) {
    const size_t d = ds.train.n_cols();
    const size_t n = ds.train.n_rows();
    if (ds.transform.empty()) ds.transform.resize(d);
    for (size_t j = 0; j < d; ++j) {
        ColumnTransform& t = ds.transform[j];
        double sum = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double v = ds.train.values.at(i, j);
            if (is_missing(v))
                throw Error("fit_apply_scaler: missing values present, impute first");
            sum += v;
        }
        t.mean = n ? sum / static_cast<double>(n) : 0.0;
        double ss = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double dev = ds.train.values.at(i, j) - t.mean;
            ss += dev * dev;
        }
        t.stddev = n ? std::sqrt(ss / static_cast<double>(n)) : 0.0;

        if (ds.train.columns[j].kind == ColumnKind::binary) {
            t.scaled = false;
            continue;
        }
        t.scaled = true;
        if (t.stddev == 0.0) {
            t.degenerate = true;
            ds.warnings.push_back("column '" + ds.train.columns[j].name +
                                  "' is constant in training data; centering only");
        }
        double denom = t.degenerate ? 1.0 : t.stddev;
        for (size_t i = 0; i < n; ++i)
            ds.train.values.at(i, j) = (ds.train.values.at(i, j) - t.mean) / denom;
        for (size_t i = 0; i < ds.test.n_rows(); ++i) {
            double v = ds.test.values.at(i, j);
            if (is_missing(v))
                throw Error("fit_apply_scaler: missing values present, impute first");
            ds.test.values.at(i, j) = (v - t.mean) / denom;
        }
    }
    return ds;
}

// Imputes and scales the whole dataset in place (no held-out split); used by
// pipelines that cluster rather than classify.
inline SplitDataset preprocess_full(const FeatureMatrix& fm, const std::vector<int>& labels,
                                    uint64_t seed) {
    if (labels.size() != fm.n_rows())
        throw DataError("preprocess_full: labels length does not match row count");
    SplitDataset ds;
    ds.seed = seed;
    ds.train = fm;
    ds.test.columns = fm.columns;
    ds.test.values = Matrix(0, fm.n_cols());
    ds.train_labels = labels;
    return fit_apply_scaler(fit_apply_imputer(std::move(ds)));
}

struct OversampleResult {
    FeatureMatrix features;
    std::vector<int> labels;
    // output row -> index of the input row it duplicates (identity for the
    // first n rows); lets imported per-row artifacts follow the resampling
    std::vector<size_t> source_rows;
};

// Raises every class to the majority count by duplicating uniformly drawn
// existing rows of that class. No synthetic rows.
inline OversampleResult random_oversample(const FeatureMatrix& fm, const std::vector<int>& labels,
                                          uint64_t seed) {
    if (fm.n_rows() != labels.size())
        throw DataError("random_oversample: labels length does not match row count");
    int max_label = -1;
    for (int l : labels) max_label = std::max(max_label, l);
    if (max_label < 1) throw DataError("random_oversample: need at least 2 classes");

    std::vector<std::vector<size_t>> rows_of(static_cast<size_t>(max_label) + 1);
    for (size_t i = 0; i < labels.size(); ++i) rows_of[labels[i]].push_back(i);

    size_t majority = 0;
    for (const auto& rows : rows_of) majority = std::max(majority, rows.size());

    OversampleResult out;
    out.features = fm;
    out.labels = labels;
    out.source_rows.resize(fm.n_rows());
    for (size_t i = 0; i < fm.n_rows(); ++i) out.source_rows[i] = i;

    for (size_t c = 0; c < rows_of.size(); ++c) {
        const auto& rows = rows_of[c];
        if (rows.empty()) continue;
        Rng rng(Rng::derive(seed, c));
        for (size_t k = rows.size(); k < majority; ++k) {
            size_t src = rows[rng.below(rows.size())];
            out.features.append_row(fm, src);
            out.labels.push_back(static_cast<int>(c));
            out.source_rows.push_back(src);
        }
    }
    return out;
}

inline json transform_json(const SplitDataset& ds) {
    json cols = json::array();
    for (size_t j = 0; j < ds.transform.size(); ++j) {
        const ColumnTransform& t = ds.transform[j];
        json c;
        c["name"] = ds.train.columns[j].name;
        c["kind"] = column_kind_name(ds.train.columns[j].kind);
        c["median"] = t.median;
        c["mean"] = t.mean;
        c["stddev"] = t.stddev;
        c["scaled"] = t.scaled;
        if (t.degenerate) c["degenerate"] = true;
        if (t.imputed_empty) c["imputed_empty"] = true;
        cols.push_back(std::move(c));
    }
    json j;
    j["seed"] = ds.seed;
    j["train_rows"] = ds.train.n_rows();
    j["test_rows"] = ds.test.n_rows();
    j["columns"] = cols;
    j["warnings"] = ds.warnings;
    return j;
}

}  // namespace terpscape
