#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "terpscape/classify/model.hpp"
#include "terpscape/matrix.hpp"
#include "terpscape/parallel.hpp"

namespace terpscape {

struct GbdtOptions {
    size_t rounds = 100;
    size_t max_leaves = 31;
    double learning_rate = 0.1;
    size_t max_bins = 255;
    size_t min_samples_leaf = 20;
    double lambda = 1.0;  // L2 on leaf values
};

// Histogram gradient boosting on the softmax cross-entropy objective: one tree
// per class per round, leaf-wise growth by largest gain
//   gain = 0.5 * (GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)).
// Raw scores start at the log class priors, so a zero-round model predicts the
// training priors. No row or feature sampling is used, so fitting needs no rng.
class GbdtModel : public TrainedModel {
public:
    GbdtModel(const Matrix& x, const std::vector<int>& y, size_t n_classes, GbdtOptions opt = {})
        : opt_(opt) {
        check_fit_inputs(x, y, n_classes);
        if (opt_.max_leaves < 1) throw UsageError("gbdt: max_leaves must be at least 1");
        if (opt_.max_bins < 2) throw UsageError("gbdt: max_bins must be at least 2");
        if (opt_.min_samples_leaf < 1) throw UsageError("gbdt: min_samples_leaf must be at least 1");
        if (!(opt_.learning_rate > 0.0)) throw UsageError("gbdt: learning_rate must be positive");
        if (opt_.lambda < 0.0) throw UsageError("gbdt: lambda must be non-negative");

        const size_t n = x.rows, d = x.cols;
        log_prior_.assign(n_classes, -std::numeric_limits<double>::infinity());
        std::vector<size_t> counts(n_classes, 0);
        for (int label : y) ++counts[label];
        for (size_t c = 0; c < n_classes; ++c)
            if (counts[c])
                log_prior_[c] =
                    std::log(static_cast<double>(counts[c]) / static_cast<double>(n));

        // bin every feature once on the training data
        std::vector<std::vector<double>> thresholds(d);
        std::vector<std::vector<uint16_t>> col_bins(d);
        {
            std::vector<double> col(n);
            for (size_t j = 0; j < d; ++j) {
                for (size_t i = 0; i < n; ++i) col[i] = x.at(i, j);
                std::sort(col.begin(), col.end());
                std::vector<double> distinct;
                for (double v : col)
                    if (distinct.empty() || v > distinct.back()) distinct.push_back(v);
                auto& t = thresholds[j];
                if (distinct.size() <= opt_.max_bins) {
                    for (size_t k = 0; k + 1 < distinct.size(); ++k)
                        t.push_back(midpoint_below(distinct[k], distinct[k + 1]));
                } else {
                    for (size_t k = 1; k < opt_.max_bins; ++k) {
                        size_t pos = k * n / opt_.max_bins;
                        if (pos == 0 || !(col[pos] > col[pos - 1])) continue;
                        double thr = midpoint_below(col[pos - 1], col[pos]);
                        if (t.empty() || thr > t.back()) t.push_back(thr);
                    }
                }
                col_bins[j].resize(n);
                for (size_t i = 0; i < n; ++i)
                    col_bins[j][i] = static_cast<uint16_t>(
                        std::lower_bound(t.begin(), t.end(), x.at(i, j)) - t.begin());
            }
        }
        std::vector<size_t> offsets(d + 1, 0);
        for (size_t j = 0; j < d; ++j) offsets[j + 1] = offsets[j] + thresholds[j].size() + 1;

        Matrix f(n, n_classes);
        for (size_t i = 0; i < n; ++i)
            for (size_t c = 0; c < n_classes; ++c) f.at(i, c) = log_prior_[c];

        Matrix p(n, n_classes);
        std::vector<double> grad(n), hess(n);
        for (size_t round = 0; round < opt_.rounds; ++round) {
            for (size_t i = 0; i < n; ++i) softmax_row(f.row(i), p.row(i), n_classes);
            for (size_t c = 0; c < n_classes; ++c) {
                for (size_t i = 0; i < n; ++i) {
                    double pc = p.at(i, c);
                    grad[i] = pc - (static_cast<size_t>(y[i]) == c ? 1.0 : 0.0);
                    hess[i] = pc * (1.0 - pc);
                }
                trees_.push_back(grow_tree(static_cast<int>(c), col_bins, thresholds, offsets,
                                           grad, hess, f));
            }
        }
    }

    const char* algorithm() const override { return "gbdt"; }

    Matrix predict_scores(const Matrix& q) const override {
        check_predict_input(q);
        Matrix f(q.rows, n_classes_);
        for (size_t i = 0; i < q.rows; ++i)
            for (size_t c = 0; c < n_classes_; ++c) f.at(i, c) = log_prior_[c];
        for (const auto& tree : trees_) {
            for (size_t i = 0; i < q.rows; ++i) {
                size_t node = 0;
                while (tree.nodes[node].feature >= 0)
                    node = q.at(i, static_cast<size_t>(tree.nodes[node].feature)) <=
                                   tree.nodes[node].threshold
                               ? static_cast<size_t>(tree.nodes[node].left)
                               : static_cast<size_t>(tree.nodes[node].right);
                f.at(i, tree.cls) += tree.nodes[node].value;
            }
        }
        Matrix scores(q.rows, n_classes_);
        for (size_t i = 0; i < q.rows; ++i) softmax_row(f.row(i), scores.row(i), n_classes_);
        return scores;
    }

    size_t tree_count() const { return trees_.size(); }
    const std::vector<double>& log_priors() const { return log_prior_; }

private:
    struct TreeNode {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        double value = 0.0;
    };
    struct BoostTree {
        int cls = 0;
        std::vector<TreeNode> nodes;
    };
    struct BinStats {
        double g = 0.0, h = 0.0;
        uint32_t n = 0;
    };
    struct LeafState {
        std::vector<uint32_t> rows;
        std::vector<BinStats> hist;
        double g = 0.0, h = 0.0;
    };
    struct Split {
        double gain = 0.0;  // usable only when strictly positive
        int feature = -1;
        uint32_t bin = 0;
        double g_l = 0.0, h_l = 0.0;
        uint32_t n_l = 0;
    };

    static void softmax_row(const double* f, double* out, size_t k) {
        double best = -std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < k; ++c) best = std::max(best, f[c]);
        double z = 0.0;
        for (size_t c = 0; c < k; ++c) z += std::exp(f[c] - best);
        for (size_t c = 0; c < k; ++c) out[c] = std::exp(f[c] - best) / z;
    }

    static double midpoint_below(double lo, double hi) {
        double m = (lo + hi) / 2.0;
        return m >= hi ? lo : m;
    }

    void build_hist(LeafState& leaf, const std::vector<std::vector<uint16_t>>& col_bins,
                    const std::vector<size_t>& offsets, const std::vector<double>& grad,
                    const std::vector<double>& hess) const {
        const size_t d = col_bins.size();
        leaf.hist.assign(offsets[d], BinStats{});
        parallel_for(d, [&](size_t j) {
            BinStats* base = leaf.hist.data() + offsets[j];
            const uint16_t* bins = col_bins[j].data();
            for (uint32_t i : leaf.rows) {
                BinStats& s = base[bins[i]];
                s.g += grad[i];
                s.h += hess[i];
                ++s.n;
            }
        });
    }

    Split find_best(const LeafState& leaf, const std::vector<std::vector<double>>& thresholds,
                    const std::vector<size_t>& offsets) const {
        Split best;
        const double lam = opt_.lambda;
        const double parent = leaf.h + lam > 0.0 ? leaf.g * leaf.g / (leaf.h + lam) : 0.0;
        const uint32_t n_node = static_cast<uint32_t>(leaf.rows.size());
        for (size_t j = 0; j < thresholds.size(); ++j) {
            const size_t nb = thresholds[j].size() + 1;
            if (nb < 2) continue;
            const BinStats* base = leaf.hist.data() + offsets[j];
            double gl = 0.0, hl = 0.0;
            uint32_t cl = 0;
            for (size_t b = 0; b + 1 < nb; ++b) {
                gl += base[b].g;
                hl += base[b].h;
                cl += base[b].n;
                if (cl < opt_.min_samples_leaf) continue;
                if (n_node - cl < opt_.min_samples_leaf) break;
                const double gr = leaf.g - gl, hr = leaf.h - hl;
                const double gain =
                    0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent);
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = static_cast<int>(j);
                    best.bin = static_cast<uint32_t>(b);
                    best.g_l = gl;
                    best.h_l = hl;
                    best.n_l = cl;
                }
            }
        }
        return best;
    }

    BoostTree grow_tree(int cls, const std::vector<std::vector<uint16_t>>& col_bins,
                        const std::vector<std::vector<double>>& thresholds,
                        const std::vector<size_t>& offsets, const std::vector<double>& grad,
                        const std::vector<double>& hess, Matrix& f) const {
        BoostTree tree;
        tree.cls = cls;
        tree.nodes.emplace_back();

        std::map<size_t, LeafState> states;
        std::map<size_t, Split> pending;
        {
            LeafState root;
            root.rows.resize(grad.size());
            for (size_t i = 0; i < grad.size(); ++i) root.rows[i] = static_cast<uint32_t>(i);
            build_hist(root, col_bins, offsets, grad, hess);
            for (double g : grad) root.g += g;
            for (double h : hess) root.h += h;
            Split s = find_best(root, thresholds, offsets);
            states.emplace(0, std::move(root));
            if (s.gain > 0.0) pending.emplace(0, s);
        }

        size_t leaves = 1;
        while (leaves < opt_.max_leaves && !pending.empty()) {
            // largest gain wins; map order makes ties go to the smaller node id
            auto pick = pending.begin();
            for (auto it = std::next(pending.begin()); it != pending.end(); ++it)
                if (it->second.gain > pick->second.gain) pick = it;
            const size_t parent_id = pick->first;
            const Split split = pick->second;
            pending.erase(pick);

            LeafState parent = std::move(states.at(parent_id));
            states.erase(parent_id);

            LeafState left, right;
            const uint16_t* bins = col_bins[split.feature].data();
            for (uint32_t i : parent.rows)
                (bins[i] <= split.bin ? left.rows : right.rows).push_back(i);
            left.g = split.g_l;
            left.h = split.h_l;
            right.g = parent.g - split.g_l;
            right.h = parent.h - split.h_l;

            // build the smaller child's histogram, derive the sibling by subtraction
            LeafState& small = left.rows.size() <= right.rows.size() ? left : right;
            LeafState& big = left.rows.size() <= right.rows.size() ? right : left;
            build_hist(small, col_bins, offsets, grad, hess);
            big.hist = std::move(parent.hist);
            for (size_t k = 0; k < big.hist.size(); ++k) {
                big.hist[k].g -= small.hist[k].g;
                big.hist[k].h -= small.hist[k].h;
                big.hist[k].n -= small.hist[k].n;
            }

            const size_t left_id = tree.nodes.size(), right_id = tree.nodes.size() + 1;
            tree.nodes[parent_id].feature = split.feature;
            tree.nodes[parent_id].threshold = thresholds[split.feature][split.bin];
            tree.nodes[parent_id].left = static_cast<int>(left_id);
            tree.nodes[parent_id].right = static_cast<int>(right_id);
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();

            Split ls = find_best(left, thresholds, offsets);
            Split rs = find_best(right, thresholds, offsets);
            states.emplace(left_id, std::move(left));
            states.emplace(right_id, std::move(right));
            if (ls.gain > 0.0) pending.emplace(left_id, ls);
            if (rs.gain > 0.0) pending.emplace(right_id, rs);
            ++leaves;
        }

        for (auto& [id, leaf] : states) {
            const double denom = leaf.h + opt_.lambda;
            const double value =
                denom > 0.0 ? -leaf.g / denom * opt_.learning_rate : 0.0;
            tree.nodes[id].value = value;
            for (uint32_t i : leaf.rows) f.at(i, cls) += value;
        }
        return tree;
    }

    GbdtOptions opt_;
    std::vector<double> log_prior_;
    std::vector<BoostTree> trees_;
};

}  // namespace terpscape
