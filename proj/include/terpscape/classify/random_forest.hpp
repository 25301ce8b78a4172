#pragma once

#include <memory>
#include <vector>

#include "terpscape/classify/decision_tree.hpp"
#include "terpscape/classify/model.hpp"
#include "terpscape/matrix.hpp"
#include "terpscape/parallel.hpp"
#include "terpscape/rng.hpp"

namespace terpscape {

struct ForestOptions {
    size_t n_trees = 100;
    TreeOptions tree{};  // features defaults to sqrt for forests, see constructor
};

// Bagged CART ensemble. Each tree draws its own bootstrap sample and feature
// subsets from an independent seed stream; scores are hard-vote shares.
class RandomForestModel : public TrainedModel {
public:
    RandomForestModel(const Matrix& x, const std::vector<int>& y, size_t n_classes,
                      ForestOptions opt, uint64_t seed)
        : opt_(opt) {
        check_fit_inputs(x, y, n_classes);
        if (opt_.n_trees == 0) throw UsageError("random_forest: n_trees must be at least 1");
        opt_.tree.allow_single_class = true;
        const size_t n = x.rows;
        trees_.resize(opt_.n_trees);
        std::vector<uint64_t> tree_seeds(opt_.n_trees);
        std::vector<std::vector<size_t>> draws(opt_.n_trees);
        for (size_t t = 0; t < opt_.n_trees; ++t) {
            Rng rng(Rng::derive(seed, t));
            draws[t].resize(n);
            for (size_t i = 0; i < n; ++i) draws[t][i] = rng.below(n);
            tree_seeds[t] = rng.next_u64();
        }
        parallel_for(opt_.n_trees, [&](size_t t) {
            Matrix xb(n, x.cols);
            std::vector<int> yb(n);
            for (size_t i = 0; i < n; ++i) {
                const double* src = x.row(draws[t][i]);
                std::copy(src, src + x.cols, xb.row(i));
                yb[i] = y[draws[t][i]];
            }
            trees_[t] = std::make_unique<DecisionTreeModel>(xb, yb, n_classes, opt_.tree,
                                                            tree_seeds[t]);
        });
    }

    static RandomForestModel default_forest(const Matrix& x, const std::vector<int>& y,
                                            size_t n_classes, uint64_t seed) {
        ForestOptions opt;
        opt.tree.features = FeatureSubset::sqrt_n;
        return RandomForestModel(x, y, n_classes, opt, seed);
    }

    const char* algorithm() const override { return "random_forest"; }

    Matrix predict_scores(const Matrix& q) const override {
        check_predict_input(q);
        Matrix votes(q.rows, n_classes_, 0.0);
        for (const auto& tree : trees_) {
            std::vector<int> pred = tree->predict(q);
            for (size_t i = 0; i < q.rows; ++i) votes.at(i, pred[i]) += 1.0;
        }
        for (double& v : votes.data) v /= static_cast<double>(trees_.size());
        return votes;
    }

    const std::vector<std::unique_ptr<DecisionTreeModel>>& trees() const { return trees_; }

private:
    ForestOptions opt_;
    std::vector<std::unique_ptr<DecisionTreeModel>> trees_;
};

}  // namespace terpscape
