#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/dimred/embedding.hpp"
#include "terpscape/dimred/pca.hpp"
#include "terpscape/feature_matrix.hpp"
#include "terpscape/linalg.hpp"
#include "terpscape/matrix.hpp"
#include "terpscape/rng.hpp"

namespace terpscape {

struct FastIcaResult {
    Embedding embedding;  // recovered sources, n × c, unit variance
    Matrix whitening;     // c × d, applied to the mean-centered input
    Matrix rotation;      // c × c orthonormal unmixing rotation
    std::vector<double> means;
    bool converged = false;
    size_t iterations = 0;
};

namespace detail {

// B^{-1/2} for a small symmetric positive-definite matrix.
inline Matrix inv_sqrt_sym(const Matrix& b) {
    EigenResult eig = jacobi_eigh(b);
    const size_t c = b.rows;
    for (double v : eig.values)
        if (v < 1e-12) throw Error("fast_ica: degenerate rotation matrix");
    Matrix out(c, c, 0.0);
    for (size_t i = 0; i < c; ++i)
        for (size_t j = 0; j < c; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < c; ++k)
                s += eig.vectors.at(i, k) * eig.vectors.at(j, k) / std::sqrt(eig.values[k]);
            out.at(i, j) = s;
        }
    return out;
}

}  // namespace detail

// Parallel (symmetric) FastICA with the log-cosh contrast: whiten by PCA,
// then fixed-point iteration with symmetric decorrelation after every step.
inline FastIcaResult fast_ica(const FeatureMatrix& X, size_t c, uint64_t seed,
                              size_t max_iter = 200, double tol = 1e-4) {
    const size_t n = X.n_rows();
    const size_t d = X.n_cols();
    if (c == 0 || c > d)
        throw UsageError("fast_ica: components must be in [1, " + std::to_string(d) + "]");
    if (n < 2) throw DataError("fast_ica: need at least 2 rows");
    detail::require_complete(X.values, "fast_ica");

    FastIcaResult res;
    res.means = column_means(X.values);
    Matrix xc = center_columns(X.values, res.means);

    // population (1/n) covariance so whitened data has exactly unit variance
    Matrix cov(d, d, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const double* r = xc.row(i);
        for (size_t a = 0; a < d; ++a)
            for (size_t b = a; b < d; ++b) cov.at(a, b) += r[a] * r[b];
    }
    for (size_t a = 0; a < d; ++a)
        for (size_t b = a; b < d; ++b) {
            cov.at(a, b) /= static_cast<double>(n);
            cov.at(b, a) = cov.at(a, b);
        }
    EigenResult eig = jacobi_eigh(cov);
    if (eig.values[c - 1] < 1e-12 * std::max(eig.values[0], 1e-30))
        throw DataError("fast_ica: data rank is below the requested " + std::to_string(c) +
                        " components");

    res.whitening = Matrix(c, d);
    for (size_t k = 0; k < c; ++k) {
        double inv = 1.0 / std::sqrt(eig.values[k]);
        for (size_t j = 0; j < d; ++j) res.whitening.at(k, j) = eig.vectors.at(j, k) * inv;
    }
    Matrix z(n, c);  // whitened data
    for (size_t i = 0; i < n; ++i) {
        const double* r = xc.row(i);
        for (size_t k = 0; k < c; ++k) {
            double s = 0.0;
            const double* w = res.whitening.row(k);
            for (size_t j = 0; j < d; ++j) s += w[j] * r[j];
            z.at(i, k) = s;
        }
    }

    Rng rng(seed);
    Matrix w(c, c);
    for (auto& v : w.data) v = rng.normal();
    auto decorrelate = [&](Matrix& m) {
        Matrix k(c, c, 0.0);
        for (size_t a = 0; a < c; ++a)
            for (size_t b = 0; b < c; ++b) {
                double s = 0.0;
                for (size_t j = 0; j < c; ++j) s += m.at(a, j) * m.at(b, j);
                k.at(a, b) = s;
            }
        m = matmul(detail::inv_sqrt_sym(k), m);
    };
    decorrelate(w);

    for (size_t it = 0; it < max_iter; ++it) {
        Matrix w_new(c, c, 0.0);
        std::vector<double> gprime_mean(c, 0.0);
        for (size_t i = 0; i < n; ++i) {
            const double* zi = z.row(i);
            for (size_t k = 0; k < c; ++k) {
                double u = 0.0;
                const double* wk = w.row(k);
                for (size_t j = 0; j < c; ++j) u += wk[j] * zi[j];
                double g = std::tanh(u);
                gprime_mean[k] += 1.0 - g * g;
                double* wn = w_new.row(k);
                for (size_t j = 0; j < c; ++j) wn[j] += zi[j] * g;
            }
        }
        for (size_t k = 0; k < c; ++k) {
            double gp = gprime_mean[k] / static_cast<double>(n);
            for (size_t j = 0; j < c; ++j)
                w_new.at(k, j) = w_new.at(k, j) / static_cast<double>(n) - gp * w.at(k, j);
        }
        decorrelate(w_new);
        double delta = 0.0;
        for (size_t k = 0; k < c; ++k) {
            double dot = 0.0;
            for (size_t j = 0; j < c; ++j) dot += w_new.at(k, j) * w.at(k, j);
            delta = std::max(delta, std::abs(1.0 - std::abs(dot)));
        }
        w = std::move(w_new);
        res.iterations = it + 1;
        if (delta < tol) {
            res.converged = true;
            break;
        }
    }
    res.rotation = w;

    res.embedding.points = Matrix(n, c);
    for (size_t i = 0; i < n; ++i) {
        const double* zi = z.row(i);
        for (size_t k = 0; k < c; ++k) {
            double s = 0.0;
            const double* wk = w.row(k);
            for (size_t j = 0; j < c; ++j) s += wk[j] * zi[j];
            res.embedding.points.at(i, k) = s;
        }
    }
    res.embedding.method = "fastica";
    res.embedding.params = {{"components", c},
                            {"seed", seed},
                            {"max_iter", max_iter},
                            {"tol", tol},
                            {"converged", res.converged},
                            {"iterations", res.iterations}};
    res.embedding.row_ids = X.row_ids;
    return res;
}

}  // namespace terpscape
