#pragma once

#include <algorithm>
#include <vector>

#include "terpscape/classify/model.hpp"
#include "terpscape/matrix.hpp"
#include "terpscape/parallel.hpp"

namespace terpscape {

// k nearest neighbors by Euclidean distance; scores are vote shares.
// Neighbor ties at the k boundary prefer the smaller class index, then the
// smaller training row.
class KnnModel : public TrainedModel {
public:
    KnnModel(const Matrix& x, const std::vector<int>& y, size_t n_classes, size_t k)
        : x_(x), y_(y), k_(k) {
        check_fit_inputs(x, y, n_classes);
        if (k_ == 0 || k_ > x.rows)
            throw UsageError("knn: k must be in [1, " + std::to_string(x.rows) + "]");
    }

    const char* algorithm() const override { return "knn"; }

    Matrix predict_scores(const Matrix& x) const override {
        check_predict_input(x);
        Matrix scores(x.rows, n_classes_, 0.0);
        parallel_for(x.rows, [&](size_t i) {
            std::vector<std::pair<double, size_t>> dist(x_.rows);
            for (size_t t = 0; t < x_.rows; ++t)
                dist[t] = {sq_dist(x.row(i), x_.row(t), x.cols), t};
            std::partial_sort(dist.begin(), dist.begin() + k_, dist.end(),
                              [&](const auto& a, const auto& b) {
                                  if (a.first != b.first) return a.first < b.first;
                                  if (y_[a.second] != y_[b.second])
                                      return y_[a.second] < y_[b.second];
                                  return a.second < b.second;
                              });
            for (size_t t = 0; t < k_; ++t)
                scores.at(i, y_[dist[t].second]) += 1.0 / static_cast<double>(k_);
        });
        return scores;
    }

private:
    Matrix x_;
    std::vector<int> y_;
    size_t k_;
};

}  // namespace terpscape
