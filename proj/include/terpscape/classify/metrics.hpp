#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/csv.hpp"
#include "terpscape/matrix.hpp"

namespace terpscape {

struct ClassMetrics {
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    double balanced_accuracy = 0.0;
    double ovo_auc = 0.0;
    double accuracy = 0.0;
    std::vector<std::vector<size_t>> confusion;  // rows = true, cols = predicted
    std::vector<std::string> warnings;
};

namespace detail {

// 1-based ranks with tied values sharing their midpoint rank
inline std::vector<double> midpoint_ranks(const std::vector<double>& s) {
    const size_t m = s.size();
    std::vector<size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return s[a] < s[b]; });
    std::vector<double> ranks(m);
    size_t i = 0;
    while (i < m) {
        size_t j = i;
        while (j + 1 < m && s[order[j + 1]] == s[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

// P(score of a positive > score of a negative), ties counted half
inline double directed_auc(const std::vector<double>& score, const std::vector<bool>& positive) {
    std::vector<double> ranks = midpoint_ranks(score);
    double rank_sum = 0.0;
    size_t n_pos = 0;
    for (size_t i = 0; i < score.size(); ++i)
        if (positive[i]) {
            rank_sum += ranks[i];
            ++n_pos;
        }
    const size_t n_neg = score.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::numeric_limits<double>::quiet_NaN();
    return (rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace detail

// Hand-&-Till one-vs-one AUC: for every unordered class pair average the two
// directed AUCs, then take the unweighted mean over pairs.
inline double ovo_auc_score(const std::vector<int>& y_true, const Matrix& scores,
                            size_t n_classes, std::vector<std::string>* warnings = nullptr) {
    std::vector<size_t> support(n_classes, 0);
    for (int label : y_true) ++support[label];
    double total = 0.0;
    size_t pairs = 0;
    std::vector<double> col;
    std::vector<bool> positive;
    for (size_t a = 0; a + 1 < n_classes; ++a) {
        if (!support[a]) continue;
        for (size_t b = a + 1; b < n_classes; ++b) {
            if (!support[b]) continue;
            col.clear();
            positive.clear();
            for (size_t i = 0; i < y_true.size(); ++i) {
                const size_t c = static_cast<size_t>(y_true[i]);
                if (c != a && c != b) continue;
                col.push_back(scores.at(i, a));
                positive.push_back(c == a);
            }
            const double auc_a = detail::directed_auc(col, positive);
            for (size_t i = 0, t = 0; i < y_true.size(); ++i) {
                const size_t c = static_cast<size_t>(y_true[i]);
                if (c != a && c != b) continue;
                col[t] = scores.at(i, b);
                positive[t] = c == b;
                ++t;
            }
            const double auc_b = detail::directed_auc(col, positive);
            total += 0.5 * (auc_a + auc_b);
            ++pairs;
        }
    }
    if (pairs == 0) {
        if (warnings) warnings->push_back("ovo_auc: no class pair has samples on both sides");
        return std::numeric_limits<double>::quiet_NaN();
    }
    return total / static_cast<double>(pairs);
}

inline ClassMetrics classification_metrics(const std::vector<int>& y_true,
                                           const std::vector<int>& y_pred, const Matrix& scores,
                                           size_t n_classes) {
    if (y_true.size() != y_pred.size())
        throw DataError("metrics: y_true and y_pred lengths differ");
    if (y_true.empty()) throw DataError("metrics: empty label vectors");
    if (scores.rows != y_true.size() || scores.cols != n_classes)
        throw DataError("metrics: score matrix shape does not match labels");
    for (int label : y_true)
        if (label < 0 || static_cast<size_t>(label) >= n_classes)
            throw DataError("metrics: unknown label " + std::to_string(label) + " in y_true");
    for (int label : y_pred)
        if (label < 0 || static_cast<size_t>(label) >= n_classes)
            throw DataError("metrics: unknown label " + std::to_string(label) + " in y_pred");

    ClassMetrics m;
    m.confusion.assign(n_classes, std::vector<size_t>(n_classes, 0));
    for (size_t i = 0; i < y_true.size(); ++i) ++m.confusion[y_true[i]][y_pred[i]];

    const double n = static_cast<double>(y_true.size());
    size_t trace = 0;
    double recall_sum = 0.0;
    size_t present_classes = 0;
    for (size_t c = 0; c < n_classes; ++c) {
        size_t row_sum = 0, col_sum = 0;
        for (size_t j = 0; j < n_classes; ++j) {
            row_sum += m.confusion[c][j];
            col_sum += m.confusion[j][c];
        }
        trace += m.confusion[c][c];
        const double tp = static_cast<double>(m.confusion[c][c]);
        double precision = 0.0, recall = 0.0;
        if (col_sum > 0) {
            precision = tp / static_cast<double>(col_sum);
        } else if (row_sum > 0) {
            m.warnings.push_back("precision undefined for class " + std::to_string(c) +
                                 " (never predicted), treated as 0");
        }
        if (row_sum > 0) {
            recall = tp / static_cast<double>(row_sum);
            recall_sum += recall;
            ++present_classes;
        } else {
            m.warnings.push_back("class " + std::to_string(c) +
                                 " has no true samples, excluded from balanced accuracy");
        }
        const double f1 = precision + recall > 0.0
                              ? 2.0 * precision * recall / (precision + recall)
                              : 0.0;
        const double w = static_cast<double>(row_sum) / n;
        m.weighted_precision += w * precision;
        m.weighted_recall += w * recall;
        m.weighted_f1 += w * f1;
    }
    m.accuracy = static_cast<double>(trace) / n;
    m.balanced_accuracy =
        present_classes > 0 ? recall_sum / static_cast<double>(present_classes) : 0.0;
    m.ovo_auc = ovo_auc_score(y_true, scores, n_classes, &m.warnings);
    return m;
}

inline void confusion_to_csv(std::ostream& out, const std::vector<std::vector<size_t>>& confusion,
                             const std::vector<std::string>& class_names) {
    std::vector<std::string> header{"true\\predicted"};
    header.insert(header.end(), class_names.begin(), class_names.end());
    write_csv_row(out, header);
    for (size_t i = 0; i < confusion.size(); ++i) {
        std::vector<std::string> row{class_names[i]};
        for (size_t j = 0; j < confusion[i].size(); ++j)
            row.push_back(std::to_string(confusion[i][j]));
        write_csv_row(out, row);
    }
}

}  // namespace terpscape
