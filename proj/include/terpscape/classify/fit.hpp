#pragma once

#include <memory>
#include <string>
#include <vector>

#include "terpscape/classify/decision_tree.hpp"
#include "terpscape/classify/gbdt.hpp"
#include "terpscape/classify/knn.hpp"
#include "terpscape/classify/mlp.hpp"
#include "terpscape/classify/model.hpp"
#include "terpscape/classify/naive_bayes.hpp"
#include "terpscape/classify/random_forest.hpp"

namespace terpscape {

inline const std::vector<std::string>& known_algorithms() {
    static const std::vector<std::string> names{"knn", "gaussian_nb", "random_forest", "gbdt",
                                                "mlp"};
    return names;
}

inline std::unique_ptr<TrainedModel> fit_model(const ModelSpec& spec, const Matrix& x,
                                               const std::vector<int>& y, size_t n_classes) {
    const std::string& a = spec.algorithm;
    if (a == "knn") {
        return std::make_unique<KnnModel>(x, y, n_classes,
                                          static_cast<size_t>(spec.get_int("k", 5)));
    }
    if (a == "gaussian_nb") {
        return std::make_unique<GaussianNbModel>(x, y, n_classes);
    }
    if (a == "random_forest") {
        ForestOptions opt;
        opt.n_trees = static_cast<size_t>(spec.get_int("trees", 100));
        if (spec.has("max_depth"))
            opt.tree.max_depth = static_cast<size_t>(spec.get_int("max_depth", 0));
        opt.tree.min_samples_leaf =
            static_cast<size_t>(spec.get_int("min_samples_leaf", 1));
        opt.tree.min_samples_split =
            static_cast<size_t>(spec.get_int("min_samples_split", 2));
        opt.tree.features = FeatureSubset::sqrt_n;
        if (spec.has("features")) {
            const json& v = spec.params.at("features");
            if (v.is_number())
                opt.tree.features_count = v.get<size_t>();
            else
                opt.tree.features = parse_feature_subset(v.get<std::string>());
        }
        return std::make_unique<RandomForestModel>(x, y, n_classes, opt, spec.seed);
    }
    if (a == "gbdt") {
        GbdtOptions opt;
        opt.rounds = static_cast<size_t>(spec.get_int("rounds", 100));
        opt.max_leaves = static_cast<size_t>(spec.get_int("leaves", 31));
        opt.learning_rate = spec.get_real("learning_rate", 0.1);
        opt.max_bins = static_cast<size_t>(spec.get_int("bins", 255));
        opt.min_samples_leaf = static_cast<size_t>(spec.get_int("min_samples_leaf", 20));
        opt.lambda = spec.get_real("lambda", 1.0);
        return std::make_unique<GbdtModel>(x, y, n_classes, opt);
    }
    if (a == "mlp") {
        MlpOptions opt;
        opt.hidden_units = static_cast<size_t>(spec.get_int("hidden", 100));
        opt.epochs = static_cast<size_t>(spec.get_int("epochs", 200));
        opt.batch_size = static_cast<size_t>(spec.get_int("batch_size", 32));
        opt.learning_rate = spec.get_real("learning_rate", 0.01);
        opt.momentum = spec.get_real("momentum", 0.9);
        return std::make_unique<MlpModel>(x, y, n_classes, opt, spec.seed);
    }
    throw UsageError("unknown algorithm '" + a +
                     "' (expected knn, gaussian_nb, random_forest, gbdt, or mlp)");
}

}  // namespace terpscape
