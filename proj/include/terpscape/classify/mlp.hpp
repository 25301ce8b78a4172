#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "terpscape/classify/model.hpp"
#include "terpscape/matrix.hpp"
#include "terpscape/rng.hpp"

namespace terpscape {

struct MlpOptions {
    size_t hidden_units = 100;
    size_t epochs = 200;  // fixed budget, no early stopping
    size_t batch_size = 32;
    double learning_rate = 0.01;
    double momentum = 0.9;
};

// One hidden ReLU layer, softmax output, cross-entropy loss, mini-batch
// gradient descent with momentum. Glorot-uniform weight init, zero biases.
class MlpModel : public TrainedModel {
public:
    MlpModel(const Matrix& x, const std::vector<int>& y, size_t n_classes, MlpOptions opt,
             uint64_t seed)
        : opt_(opt) {
        check_fit_inputs(x, y, n_classes);
        if (opt_.hidden_units < 1) throw UsageError("mlp: hidden_units must be at least 1");
        if (opt_.batch_size < 1) throw UsageError("mlp: batch_size must be at least 1");
        if (!(opt_.learning_rate > 0.0)) throw UsageError("mlp: learning_rate must be positive");
        if (opt_.momentum < 0.0 || opt_.momentum >= 1.0)
            throw UsageError("mlp: momentum must be in [0, 1)");

        const size_t n = x.rows, d = x.cols, h = opt_.hidden_units, k = n_classes;
        Rng rng(seed);
        w1_.assign(h * d, 0.0);
        b1_.assign(h, 0.0);
        w2_.assign(k * h, 0.0);
        b2_.assign(k, 0.0);
        const double lim1 = std::sqrt(6.0 / static_cast<double>(d + h));
        for (double& w : w1_) w = rng.uniform(-lim1, lim1);
        const double lim2 = std::sqrt(6.0 / static_cast<double>(h + k));
        for (double& w : w2_) w = rng.uniform(-lim2, lim2);

        std::vector<double> vw1(h * d, 0.0), vb1(h, 0.0), vw2(k * h, 0.0), vb2(k, 0.0);
        std::vector<size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<double> z1(h), a1(h), p(k), dz1(h);
        std::vector<double> gw1(h * d), gb1(h), gw2(k * h), gb2(k);

        for (size_t epoch = 0; epoch < opt_.epochs; ++epoch) {
            rng.shuffle(perm);
            for (size_t start = 0; start < n; start += opt_.batch_size) {
                const size_t stop = std::min(n, start + opt_.batch_size);
                const double inv_b = 1.0 / static_cast<double>(stop - start);
                std::fill(gw1.begin(), gw1.end(), 0.0);
                std::fill(gb1.begin(), gb1.end(), 0.0);
                std::fill(gw2.begin(), gw2.end(), 0.0);
                std::fill(gb2.begin(), gb2.end(), 0.0);
                for (size_t b = start; b < stop; ++b) {
                    const double* row = x.row(perm[b]);
                    forward(row, z1.data(), a1.data(), p.data());
                    for (size_t c = 0; c < k; ++c) {
                        const double dz2 =
                            (p[c] - (static_cast<size_t>(y[perm[b]]) == c ? 1.0 : 0.0)) * inv_b;
                        gb2[c] += dz2;
                        for (size_t u = 0; u < h; ++u) gw2[c * h + u] += dz2 * a1[u];
                    }
                    for (size_t u = 0; u < h; ++u) {
                        double da1 = 0.0;
                        for (size_t c = 0; c < k; ++c)
                            da1 += w2_[c * h + u] *
                                   (p[c] - (static_cast<size_t>(y[perm[b]]) == c ? 1.0 : 0.0)) *
                                   inv_b;
                        dz1[u] = z1[u] > 0.0 ? da1 : 0.0;
                        gb1[u] += dz1[u];
                        for (size_t j = 0; j < d; ++j) gw1[u * d + j] += dz1[u] * row[j];
                    }
                }
                step(vw1, w1_, gw1);
                step(vb1, b1_, gb1);
                step(vw2, w2_, gw2);
                step(vb2, b2_, gb2);
            }
        }
    }

    const char* algorithm() const override { return "mlp"; }

    Matrix predict_scores(const Matrix& q) const override {
        check_predict_input(q);
        Matrix scores(q.rows, n_classes_);
        std::vector<double> z1(opt_.hidden_units), a1(opt_.hidden_units);
        for (size_t i = 0; i < q.rows; ++i)
            forward(q.row(i), z1.data(), a1.data(), scores.row(i));
        return scores;
    }

private:
    void forward(const double* row, double* z1, double* a1, double* p) const {
        const size_t d = n_features_, h = opt_.hidden_units, k = n_classes_;
        for (size_t u = 0; u < h; ++u) {
            double z = b1_[u];
            const double* w = w1_.data() + u * d;
            for (size_t j = 0; j < d; ++j) z += w[j] * row[j];
            z1[u] = z;
            a1[u] = z > 0.0 ? z : 0.0;
        }
        double best = -std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < k; ++c) {
            double z = b2_[c];
            const double* w = w2_.data() + c * h;
            for (size_t u = 0; u < h; ++u) z += w[u] * a1[u];
            p[c] = z;
            best = std::max(best, z);
        }
        double sum = 0.0;
        for (size_t c = 0; c < k; ++c) sum += std::exp(p[c] - best);
        for (size_t c = 0; c < k; ++c) p[c] = std::exp(p[c] - best) / sum;
    }

    void step(std::vector<double>& vel, std::vector<double>& param,
              const std::vector<double>& grad) const {
        for (size_t i = 0; i < param.size(); ++i) {
            vel[i] = opt_.momentum * vel[i] - opt_.learning_rate * grad[i];
            param[i] += vel[i];
        }
    }

    MlpOptions opt_;
    std::vector<double> w1_, b1_, w2_, b2_;
};

}  // namespace terpscape
