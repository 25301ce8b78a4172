#pragma once

#include <cmath>
#include <vector>

#include "terpscape/classify/model.hpp"
#include "terpscape/matrix.hpp"

namespace terpscape {

// Gaussian naive Bayes: per-class feature means and population variances,
// log-density scoring. Variances are floored at 1e-9 times the largest
// overall feature variance to keep degenerate features finite.
class GaussianNbModel : public TrainedModel {
public:
    GaussianNbModel(const Matrix& x, const std::vector<int>& y, size_t n_classes) {
        check_fit_inputs(x, y, n_classes);
        const size_t n = x.rows, d = x.cols;
        means_ = Matrix(n_classes, d, 0.0);
        vars_ = Matrix(n_classes, d, 0.0);
        log_prior_.assign(n_classes, -std::numeric_limits<double>::infinity());

        std::vector<size_t> counts(n_classes, 0);
        for (size_t i = 0; i < n; ++i) {
            ++counts[y[i]];
            for (size_t j = 0; j < d; ++j) means_.at(y[i], j) += x.at(i, j);
        }
        for (size_t c = 0; c < n_classes; ++c)
            if (counts[c])
                for (size_t j = 0; j < d; ++j) means_.at(c, j) /= static_cast<double>(counts[c]);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < d; ++j) {
                double dev = x.at(i, j) - means_.at(y[i], j);
                vars_.at(y[i], j) += dev * dev;
            }

        // floor: 1e-9 times the largest overall feature variance
        std::vector<double> mu = column_means(x);
        double max_var = 0.0;
        for (size_t j = 0; j < d; ++j) {
            double ss = 0.0;
            for (size_t i = 0; i < n; ++i) {
                double dev = x.at(i, j) - mu[j];
                ss += dev * dev;
            }
            max_var = std::max(max_var, ss / static_cast<double>(n));
        }
        double floor = std::max(1e-9 * max_var, 1e-12);

        for (size_t c = 0; c < n_classes; ++c) {
            if (!counts[c]) continue;
            log_prior_[c] =
                std::log(static_cast<double>(counts[c]) / static_cast<double>(n));
            for (size_t j = 0; j < d; ++j)
                vars_.at(c, j) = std::max(vars_.at(c, j) / static_cast<double>(counts[c]), floor);
        }
    }

    const char* algorithm() const override { return "gaussian_nb"; }

    Matrix predict_scores(const Matrix& x) const override {
        check_predict_input(x);
        Matrix scores(x.rows, n_classes_, 0.0);
        const double log2pi = std::log(2.0 * 3.14159265358979323846);
        for (size_t i = 0; i < x.rows; ++i) {
            std::vector<double> logp(n_classes_, -std::numeric_limits<double>::infinity());
            double best = -std::numeric_limits<double>::infinity();
            for (size_t c = 0; c < n_classes_; ++c) {
                if (std::isinf(log_prior_[c])) continue;  // class unseen in training
                double lp = log_prior_[c];
                for (size_t j = 0; j < x.cols; ++j) {
                    double v = vars_.at(c, j);
                    double dev = x.at(i, j) - means_.at(c, j);
                    lp -= 0.5 * (log2pi + std::log(v) + dev * dev / v);
                }
                logp[c] = lp;
                best = std::max(best, lp);
            }
            double z = 0.0;
            for (size_t c = 0; c < n_classes_; ++c) z += std::exp(logp[c] - best);
            for (size_t c = 0; c < n_classes_; ++c)
                scores.at(i, c) = std::exp(logp[c] - best) / z;
        }
        return scores;
    }

private:
    Matrix means_;
    Matrix vars_;
    std::vector<double> log_prior_;
};

}  // namespace terpscape
