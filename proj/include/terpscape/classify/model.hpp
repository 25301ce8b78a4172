#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/dataset.hpp"
#include "terpscape/matrix.hpp"

namespace terpscape {

struct ModelSpec {
    std::string algorithm;  // knn | gaussian_nb | random_forest | gbdt | mlp
    json params = json::object();
    uint64_t seed = 0;

    long get_int(const std::string& key, long fallback) const {
        auto it = params.find(key);
        if (it == params.end() || it->is_null()) return fallback;
        return it->get<long>();
    }
    double get_real(const std::string& key, double fallback) const {
        auto it = params.find(key);
        if (it == params.end() || it->is_null()) return fallback;
        return it->get<double>();
    }
    std::string get_str(const std::string& key, const std::string& fallback) const {
        auto it = params.find(key);
        if (it == params.end() || it->is_null()) return fallback;
        return it->get<std::string>();
    }
    bool has(const std::string& key) const {
        auto it = params.find(key);
        return it != params.end() && !it->is_null();
    }
};

class TrainedModel {
public:
    virtual ~TrainedModel() = default;
    virtual const char* algorithm() const = 0;

    // Per-class probabilities; every row sums to 1.
    virtual Matrix predict_scores(const Matrix& x) const = 0;

    size_t n_classes() const { return n_classes_; }
    size_t n_features() const { return n_features_; }

    // argmax of scores; ties go to the smallest class index
    std::vector<int> predict(const Matrix& x) const {
        Matrix scores = predict_scores(x);
        std::vector<int> out(scores.rows);
        for (size_t i = 0; i < scores.rows; ++i) {
            int arg = 0;
            double best = scores.at(i, 0);
            for (size_t c = 1; c < scores.cols; ++c) {
                if (scores.at(i, c) > best) {
                    best = scores.at(i, c);
                    arg = static_cast<int>(c);
                }
            }
            out[i] = arg;
        }
        return out;
    }

protected:
    void check_fit_inputs(const Matrix& x, const std::vector<int>& y, size_t n_classes,
                          bool allow_single_class = false) {
        if (x.rows != y.size()) throw DataError("fit: labels length does not match row count");
        if (x.rows == 0) throw DataError("fit: empty training set");
        for (double v : x.data)
            if (!std::isfinite(v)) throw DataError("fit: non-finite feature value");
        std::vector<bool> seen(n_classes, false);
        size_t distinct = 0;
        for (int label : y) {
            if (label < 0 || static_cast<size_t>(label) >= n_classes)
                throw DataError("fit: label out of range");
            if (!seen[label]) {
                seen[label] = true;
                ++distinct;
            }
        }
        if (distinct < 2 && !allow_single_class)
            throw DataError("fit: training labels contain a single class");
        n_features_ = x.cols;
        n_classes_ = n_classes;
    }

    void check_predict_input(const Matrix& x) const {
        if (x.cols != n_features_)
            throw DataError("predict: input has " + std::to_string(x.cols) +
                            " columns, model was trained on " + std::to_string(n_features_));
    }

    size_t n_features_ = 0;
    size_t n_classes_ = 0;
};

}  // namespace terpscape
