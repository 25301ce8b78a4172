#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "terpscape/classify/model.hpp"
#include "terpscape/matrix.hpp"
#include "terpscape/rng.hpp"

namespace terpscape {

enum class FeatureSubset { all, sqrt_n, log2_n };

inline FeatureSubset parse_feature_subset(const std::string& s) {
    if (iequals(s, "all")) return FeatureSubset::all;
    if (iequals(s, "sqrt")) return FeatureSubset::sqrt_n;
    if (iequals(s, "log2")) return FeatureSubset::log2_n;
    throw UsageError("unknown feature subset '" + s + "' (expected all, sqrt, or log2)");
}

struct TreeOptions {
    std::optional<size_t> max_depth;       // unlimited when absent
    size_t min_samples_leaf = 1;
    size_t min_samples_split = 2;
    FeatureSubset features = FeatureSubset::all;
    std::optional<size_t> features_count;  // explicit count wins over the enum
    bool allow_single_class = false;       // for degenerate bootstrap resamples
};

inline size_t resolved_feature_count(const TreeOptions& opt, size_t d) {
    if (opt.features_count)
        return std::min(std::max<size_t>(*opt.features_count, 1), d);
    switch (opt.features) {
        case FeatureSubset::sqrt_n:
            return std::max<size_t>(1, static_cast<size_t>(std::sqrt(static_cast<double>(d))));
        case FeatureSubset::log2_n:
            return std::max<size_t>(1, static_cast<size_t>(std::log2(static_cast<double>(d))));
        case FeatureSubset::all:
            break;
    }
    return d;
}

// CART classifier: Gini impurity, midpoint thresholds between distinct sorted
// values, equal-gain ties resolved in favor of the first candidate scanned.
class DecisionTreeModel : public TrainedModel {
public:
    DecisionTreeModel(const Matrix& x, const std::vector<int>& y, size_t n_classes,
                      TreeOptions opt = {}, uint64_t seed = 0)
        : opt_(opt) {
        check_fit_inputs(x, y, n_classes, opt_.allow_single_class);
        Rng rng(seed);
        const size_t m = resolved_feature_count(opt_, x.cols);
        std::vector<size_t> root(x.rows);
        std::iota(root.begin(), root.end(), 0);

        struct Pending {
            std::vector<size_t> idx;
            size_t depth;
            size_t node;
        };
        nodes_.emplace_back();
        std::vector<Pending> stack;
        stack.push_back({std::move(root), 0, 0});
        while (!stack.empty()) {
            Pending item = std::move(stack.back());
            stack.pop_back();
            grow(x, y, item.idx, item.depth, item.node, rng, m, stack);
        }
    }

    const char* algorithm() const override { return "decision_tree"; }

    Matrix predict_scores(const Matrix& q) const override {
        check_predict_input(q);
        Matrix scores(q.rows, n_classes_, 0.0);
        for (size_t i = 0; i < q.rows; ++i) {
            size_t node = 0;
            while (nodes_[node].feature >= 0)
                node = q.at(i, static_cast<size_t>(nodes_[node].feature)) <= nodes_[node].threshold
                           ? nodes_[node].left
                           : nodes_[node].right;
            for (size_t c = 0; c < n_classes_; ++c) scores.at(i, c) = nodes_[node].dist[c];
        }
        return scores;
    }

    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        size_t left = 0, right = 0;
        std::vector<double> dist;
    };

    struct SplitChoice {
        int feature = -1;
        double threshold = 0.0;
        double score = -std::numeric_limits<double>::infinity();
    };

    template <typename Stack>
    void grow(const Matrix& x, const std::vector<int>& y, const std::vector<size_t>& idx,
              size_t depth, size_t node, Rng& rng, size_t m, Stack& stack) {
        const size_t n = idx.size();
        std::vector<size_t> counts(n_classes_, 0);
        for (size_t i : idx) ++counts[y[i]];
        size_t present = 0;
        for (size_t c : counts) present += c > 0 ? 1 : 0;

        bool splittable = present > 1 && n >= opt_.min_samples_split &&
                          (!opt_.max_depth || depth < *opt_.max_depth);
        SplitChoice best;
        if (splittable) {
            std::vector<size_t> feats = rng.sample_without_replacement(x.cols, m);
            std::sort(feats.begin(), feats.end());
            best = best_split(x, y, idx, counts, feats);
        }
        if (best.feature < 0) {
            nodes_[node].dist.assign(n_classes_, 0.0);
            for (size_t c = 0; c < n_classes_; ++c)
                nodes_[node].dist[c] = static_cast<double>(counts[c]) / static_cast<double>(n);
            return;
        }

        std::vector<size_t> left, right;
        for (size_t i : idx) {
            if (x.at(i, static_cast<size_t>(best.feature)) <= best.threshold)
                left.push_back(i);
            else
                right.push_back(i);
        }
        nodes_[node].feature = best.feature;
        nodes_[node].threshold = best.threshold;
        nodes_[node].left = nodes_.size();
        nodes_[node].right = nodes_.size() + 1;
        nodes_.emplace_back();
        nodes_.emplace_back();
        // push right first so the left branch is grown first (fixes rng order)
        stack.push_back({std::move(right), depth + 1, nodes_[node].right});
        stack.push_back({std::move(left), depth + 1, nodes_[node].left});
    }

    SplitChoice best_split(const Matrix& x, const std::vector<int>& y,
                           const std::vector<size_t>& idx, const std::vector<size_t>& counts,
                           const std::vector<size_t>& feats) const {
        const size_t n = idx.size();
        SplitChoice best;
        std::vector<std::pair<double, int>> vals(n);
        std::vector<size_t> left_counts(n_classes_), right_counts(n_classes_);
        for (size_t f : feats) {
            for (size_t i = 0; i < n; ++i) vals[i] = {x.at(idx[i], f), y[idx[i]]};
            std::sort(vals.begin(), vals.end());
            if (vals.front().first == vals.back().first) continue;  // constant feature

            std::fill(left_counts.begin(), left_counts.end(), 0);
            right_counts = counts;
            double ssq_l = 0.0, ssq_r = 0.0;
            for (size_t c : counts) ssq_r += static_cast<double>(c) * static_cast<double>(c);
            for (size_t i = 0; i + 1 < n; ++i) {
                const size_t c = static_cast<size_t>(vals[i].second);
                ssq_l += 2.0 * static_cast<double>(left_counts[c]) + 1.0;
                ssq_r -= 2.0 * static_cast<double>(right_counts[c]) - 1.0;
                ++left_counts[c];
                --right_counts[c];
                if (vals[i + 1].first <= vals[i].first) continue;
                const size_t nl = i + 1, nr = n - nl;
                if (nl < opt_.min_samples_leaf || nr < opt_.min_samples_leaf) continue;
                // minimizing weighted Gini == maximizing sum of ssq/size
                double score = ssq_l / static_cast<double>(nl) + ssq_r / static_cast<double>(nr);
                if (score > best.score) {
                    double thr = (vals[i].first + vals[i + 1].first) / 2.0;
                    if (thr >= vals[i + 1].first) thr = vals[i].first;
                    best = {static_cast<int>(f), thr, score};
                }
            }
        }
        return best;
    }

    TreeOptions opt_;
    std::vector<Node> nodes_;
};

}  // namespace terpscape
