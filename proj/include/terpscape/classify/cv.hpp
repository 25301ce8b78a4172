#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "terpscape/classify/fit.hpp"
#include "terpscape/classify/metrics.hpp"
#include "terpscape/parallel.hpp"
#include "terpscape/rng.hpp"

namespace terpscape {

// Validation-fold index sets: per class, a seeded shuffle dealt round-robin, so
// every fold's class proportions sit within one sample of the global ones.
inline std::vector<std::vector<size_t>> stratified_folds(
    const std::vector<int>& y, size_t n_classes, size_t folds, uint64_t seed,
    const std::vector<std::string>& class_names = {}) {
    if (folds < 2) throw UsageError("stratified folds: need at least 2 folds");
    if (y.size() < folds) throw DataError("stratified folds: fewer samples than folds");
    std::vector<std::vector<size_t>> by_class(n_classes);
    for (size_t i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || static_cast<size_t>(y[i]) >= n_classes)
            throw DataError("stratified folds: label out of range");
        by_class[y[i]].push_back(i);
    }
    std::vector<std::vector<size_t>> out(folds);
    for (size_t c = 0; c < n_classes; ++c) {
        if (by_class[c].empty()) continue;
        if (by_class[c].size() < folds) {
            const std::string name =
                c < class_names.size() ? class_names[c] : std::to_string(c);
            throw DataError("stratified folds: class '" + name + "' has " +
                            std::to_string(by_class[c].size()) + " samples, fewer than " +
                            std::to_string(folds) + " folds");
        }
        Rng rng(Rng::derive(seed, c));
        rng.shuffle(by_class[c]);
        for (size_t pos = 0; pos < by_class[c].size(); ++pos)
            out[pos % folds].push_back(by_class[c][pos]);
    }
    for (auto& fold : out) std::sort(fold.begin(), fold.end());
    return out;
}

struct FoldResult {
    ClassMetrics metrics;
    double wall_seconds = 0.0;  // log-only; never serialized into artifacts
};

struct MetricSummary {
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    double balanced_accuracy = 0.0;
    double ovo_auc = 0.0;
    double accuracy = 0.0;
};

struct CvReport {
    ModelSpec spec;
    std::vector<FoldResult> folds;
    MetricSummary mean;
    MetricSummary stddev;  // population std over folds
    std::vector<std::vector<size_t>> confusion;  // summed over validation folds
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;
};

namespace detail {

template <typename Get>
inline void summarize_metric(const std::vector<FoldResult>& folds, Get get, double& mean_out,
                             double& std_out) {
    double mean = 0.0;
    for (const auto& f : folds) mean += get(f.metrics);
    mean /= static_cast<double>(folds.size());
    double var = 0.0;
    for (const auto& f : folds) {
        const double dev = get(f.metrics) - mean;
        var += dev * dev;
    }
    mean_out = mean;
    std_out = std::sqrt(var / static_cast<double>(folds.size()));
}

}  // namespace detail

inline CvReport cross_validate(const ModelSpec& spec, const Matrix& x, const std::vector<int>& y,
                               size_t n_classes, size_t folds, uint64_t fold_seed,
                               const std::vector<std::string>& class_names = {}) {
    const auto started = std::chrono::steady_clock::now();
    auto fold_idx = stratified_folds(y, n_classes, folds, fold_seed, class_names);

    CvReport report;
    report.spec = spec;
    report.folds.resize(folds);
    std::vector<bool> in_fold(y.size());
    std::vector<std::vector<size_t>> train_idx(folds);
    for (size_t f = 0; f < folds; ++f) {
        std::fill(in_fold.begin(), in_fold.end(), false);
        for (size_t i : fold_idx[f]) in_fold[i] = true;
        for (size_t i = 0; i < y.size(); ++i)
            if (!in_fold[i]) train_idx[f].push_back(i);
    }

    parallel_for(folds, [&](size_t f) {
        const auto fold_start = std::chrono::steady_clock::now();
        Matrix xt(train_idx[f].size(), x.cols), xv(fold_idx[f].size(), x.cols);
        std::vector<int> yt(train_idx[f].size()), yv(fold_idx[f].size());
        for (size_t i = 0; i < train_idx[f].size(); ++i) {
            const double* src = x.row(train_idx[f][i]);
            std::copy(src, src + x.cols, xt.row(i));
            yt[i] = y[train_idx[f][i]];
        }
        for (size_t i = 0; i < fold_idx[f].size(); ++i) {
            const double* src = x.row(fold_idx[f][i]);
            std::copy(src, src + x.cols, xv.row(i));
            yv[i] = y[fold_idx[f][i]];
        }
        ModelSpec fold_spec = spec;
        fold_spec.seed = Rng::derive(spec.seed, f);
        auto model = fit_model(fold_spec, xt, yt, n_classes);
        Matrix scores = model->predict_scores(xv);
        std::vector<int> pred = model->predict(xv);
        report.folds[f].metrics = classification_metrics(yv, pred, scores, n_classes);
        report.folds[f].wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - fold_start)
                .count();
    });

    // aggregate in fixed fold order so parallel and serial runs match
    report.confusion.assign(n_classes, std::vector<size_t>(n_classes, 0));
    for (const auto& fold : report.folds) {
        for (size_t i = 0; i < n_classes; ++i)
            for (size_t j = 0; j < n_classes; ++j)
                report.confusion[i][j] += fold.metrics.confusion[i][j];
        for (const auto& w : fold.metrics.warnings) report.warnings.push_back(w);
    }
    using M = const ClassMetrics&;
    detail::summarize_metric(report.folds, [](M m) { return m.weighted_precision; },
                             report.mean.weighted_precision, report.stddev.weighted_precision);
    detail::summarize_metric(report.folds, [](M m) { return m.weighted_recall; },
                             report.mean.weighted_recall, report.stddev.weighted_recall);
    detail::summarize_metric(report.folds, [](M m) { return m.weighted_f1; },
                             report.mean.weighted_f1, report.stddev.weighted_f1);
    detail::summarize_metric(report.folds, [](M m) { return m.balanced_accuracy; },
                             report.mean.balanced_accuracy, report.stddev.balanced_accuracy);
    detail::summarize_metric(report.folds, [](M m) { return m.ovo_auc; },
                             report.mean.ovo_auc, report.stddev.ovo_auc);
    detail::summarize_metric(report.folds, [](M m) { return m.accuracy; },
                             report.mean.accuracy, report.stddev.accuracy);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace terpscape
