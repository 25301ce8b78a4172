#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/dimred/embedding.hpp"
#include "terpscape/dimred/pca.hpp"
#include "terpscape/feature_matrix.hpp"
#include "terpscape/matrix.hpp"
#include "terpscape/parallel.hpp"
#include "terpscape/rng.hpp"

namespace terpscape {

struct TsneOptions {
    double perplexity = 30.0;
    size_t d_out = 2;
    size_t iters = 1000;
    double learning_rate = 200.0;
    double early_exaggeration = 12.0;
    size_t exaggeration_iters = 250;  // momentum also switches 0.5 -> 0.8 here
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    size_t max_n = 5000;  // exact O(n²) method; import an embedding beyond this
};

struct TsneResult {
    Embedding embedding;
    std::vector<double> kl_trace;  // KL(P‖Q) under the plain (unexaggerated) P
};

// Conditional affinities: row i holds P_{j|i}, the Gaussian bandwidth of each
// row found by bisection so the row entropy matches log(perplexity) within
// 1e-5.
inline Matrix tsne_conditional(const Matrix& x, double perplexity) {
    const size_t n = x.rows;
    if (n < 4) throw DataError("tsne: need at least 4 rows");
    if (!(perplexity > 0.0) || perplexity >= (static_cast<double>(n) - 1.0) / 3.0)
        throw UsageError("tsne: perplexity must be in (0, (n-1)/3)");

    const double target = std::log(perplexity);
    Matrix p(n, n, 0.0);
    bool any_positive_distance = false;
    for (size_t i = 0; i < n; ++i) {
        std::vector<double> dist(n);
        for (size_t j = 0; j < n; ++j) {
            dist[j] = sq_dist(x.row(i), x.row(j), x.cols);
            if (j != i && dist[j] > 0.0) any_positive_distance = true;
        }
        double beta = 1.0;
        double beta_min = -std::numeric_limits<double>::infinity();
        double beta_max = std::numeric_limits<double>::infinity();
        std::vector<double> row(n, 0.0);
        for (int attempt = 0; attempt < 200; ++attempt) {
            double sum_p = 0.0, sum_dp = 0.0;
            for (size_t j = 0; j < n; ++j) {
                if (j == i) {
                    row[j] = 0.0;
                    continue;
                }
                row[j] = std::exp(-dist[j] * beta);
                sum_p += row[j];
                sum_dp += dist[j] * row[j];
            }
            if (sum_p <= 0.0) {
                for (size_t j = 0; j < n; ++j) row[j] = j == i ? 0.0 : 1.0 / (n - 1);
                break;
            }
            double h = std::log(sum_p) + beta * sum_dp / sum_p;
            double diff = h - target;
            if (std::abs(diff) < 1e-5) {
                for (size_t j = 0; j < n; ++j) row[j] /= sum_p;
                break;
            }
            if (diff > 0.0) {
                beta_min = beta;
                beta = std::isinf(beta_max) ? beta * 2.0 : 0.5 * (beta + beta_max);
            } else {
                beta_max = beta;
                beta = std::isinf(beta_min) ? beta * 0.5 : 0.5 * (beta + beta_min);
            }
            if (attempt == 199)
                for (size_t j = 0; j < n; ++j) row[j] /= sum_p;
        }
        double check = 0.0;
        for (size_t j = 0; j < n; ++j) check += row[j];
        if (std::abs(check - 1.0) > 1e-6)  // bisection ended on an unnormalized row
            for (size_t j = 0; j < n; ++j) row[j] /= check;
        for (size_t j = 0; j < n; ++j) p.at(i, j) = row[j];
    }
    if (!any_positive_distance)
        throw DataError("tsne: all pairwise distances are zero (duplicate-only data)");
    return p;
}

// (P + Pᵀ) / 2n — the exact joint distribution, no probability floor.
inline Matrix tsne_symmetrize(const Matrix& cond) {
    const size_t n = cond.rows;
    Matrix p(n, n, 0.0);
    double inv = 1.0 / (2.0 * static_cast<double>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) p.at(i, j) = (cond.at(i, j) + cond.at(j, i)) * inv;
    return p;
}

inline TsneResult tsne(const FeatureMatrix& X, const TsneOptions& opt, uint64_t seed) {
    const size_t n = X.n_rows();
    if (opt.d_out != 2 && opt.d_out != 3) throw UsageError("tsne: d_out must be 2 or 3");
    if (n > opt.max_n)
        throw UsageError("tsne: n=" + std::to_string(n) + " exceeds the exact-method guard n<=" +
                         std::to_string(opt.max_n) + "; use a subset or an imported embedding");
    detail::require_complete(X.values, "tsne");

    Matrix p = tsne_symmetrize(tsne_conditional(X.values, opt.perplexity));

    const size_t d = opt.d_out;
    Matrix y(n, d);
    Rng rng(seed);
    for (auto& v : y.data) v = rng.normal() * 1e-4;

    Matrix inc(n, d, 0.0);
    Matrix gains(n, d, 1.0);
    Matrix grad(n, d, 0.0);
    std::vector<double> row_z(n, 0.0);
    std::vector<double> row_kl(n, 0.0);

    TsneResult res;
    res.kl_trace.reserve(opt.iters);
    const double eps = 1e-12;

    for (size_t iter = 0; iter < opt.iters; ++iter) {
        double ex = iter < opt.exaggeration_iters ? opt.early_exaggeration : 1.0;
        double momentum =
            iter < opt.exaggeration_iters ? opt.initial_momentum : opt.final_momentum;

        // pass 1: normalizer of the Student-t kernel
        parallel_for(n, [&](size_t i) {
            const double* yi = y.row(i);
            double s = 0.0;
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                s += 1.0 / (1.0 + sq_dist(yi, y.row(j), d));
            }
            row_z[i] = s;
        });
        double z = 0.0;
        for (size_t i = 0; i < n; ++i) z += row_z[i];
        if (z <= 0.0) z = eps;

        // pass 2: gradient and the KL objective under plain P
        parallel_for(n, [&](size_t i) {
            const double* yi = y.row(i);
            double* gi = grad.row(i);
            for (size_t t = 0; t < d; ++t) gi[t] = 0.0;
            double kl = 0.0;
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double* yj = y.row(j);
                double num = 1.0 / (1.0 + sq_dist(yi, yj, d));
                double q = num / z;
                double pij = p.at(i, j);
                double coef = 4.0 * (ex * pij - q) * num;
                for (size_t t = 0; t < d; ++t) gi[t] += coef * (yi[t] - yj[t]);
                if (pij > 0.0) kl += pij * std::log(pij / std::max(q, eps));
            }
            row_kl[i] = kl;
        });
        double kl = 0.0;
        for (size_t i = 0; i < n; ++i) kl += row_kl[i];

        for (size_t i = 0; i < n; ++i) {
            for (size_t t = 0; t < d; ++t) {
                double g = grad.at(i, t);
                double& gain = gains.at(i, t);
                bool same_sign = (g > 0.0) == (inc.at(i, t) > 0.0);
                gain = same_sign ? gain * 0.8 : gain + 0.2;
                if (gain < 0.01) gain = 0.01;
                inc.at(i, t) = momentum * inc.at(i, t) - opt.learning_rate * gain * g;
                y.at(i, t) += inc.at(i, t);
            }
        }
        std::vector<double> mu = column_means(y);
        for (size_t i = 0; i < n; ++i)
            for (size_t t = 0; t < d; ++t) y.at(i, t) -= mu[t];

        res.kl_trace.push_back(kl);
    }

    res.embedding.points = std::move(y);
    res.embedding.method = "tsne";
    res.embedding.params = {{"perplexity", opt.perplexity}, {"d_out", opt.d_out},
                            {"iters", opt.iters},           {"learning_rate", opt.learning_rate},
                            {"seed", seed},                 {"kl_final", res.kl_trace.back()}};
    res.embedding.row_ids = X.row_ids;
    return res;
}

}  // namespace terpscape
