#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/dimred/embedding.hpp"
#include "terpscape/feature_matrix.hpp"
#include "terpscape/linalg.hpp"
#include "terpscape/matrix.hpp"

namespace terpscape {

struct PcaModel {
    Matrix components;  // p × d, rows orthonormal, sorted by eigenvalue
    std::vector<double> explained_variance;        // descending, length p
    std::vector<double> explained_variance_ratio;  // explained_variance / total
    std::vector<double> means;                     // column means of the fit data
    double total_variance = 0.0;                   // trace of the covariance
};

struct PcaResult {
    PcaModel model;
    Embedding embedding;
};

namespace detail {

inline void require_complete(const Matrix& m, const char* who) {
    for (double v : m.data)
        if (!std::isfinite(v)) throw DataError(std::string(who) + ": input must be complete and finite");
}

}  // namespace detail

// Eigen-decomposition of the d×d sample covariance (1/(n−1)). Sign
// convention: the largest-magnitude loading of each component is positive.
inline PcaResult pca_fit_transform(const FeatureMatrix& X, size_t p) {
    const size_t n = X.n_rows();
    const size_t d = X.n_cols();
    if (n < 2) throw DataError("pca: need at least 2 rows");
    detail::require_complete(X.values, "pca");
    const size_t rank = std::min(n - 1, d);
    if (p == 0) throw UsageError("pca: p must be >= 1");
    if (p > rank)
        throw UsageError("pca: p=" + std::to_string(p) + " exceeds attainable rank " +
                         std::to_string(rank));

    PcaResult res;
    res.model.means = column_means(X.values);
    Matrix xc = center_columns(X.values, res.model.means);

    Matrix cov(d, d, 0.0);
    for (size_t i = 0; i < n; ++i) {
        const double* r = xc.row(i);
        for (size_t a = 0; a < d; ++a) {
            double ra = r[a];
            if (ra == 0.0) continue;
            double* cr = cov.row(a);
            for (size_t b = a; b < d; ++b) cr[b] += ra * r[b];
        }
    }
    for (size_t a = 0; a < d; ++a)
        for (size_t b = a; b < d; ++b) {
            cov.at(a, b) /= static_cast<double>(n - 1);
            cov.at(b, a) = cov.at(a, b);
        }
    for (size_t a = 0; a < d; ++a) res.model.total_variance += cov.at(a, a);

    EigenResult eig = jacobi_eigh(cov);
    for (auto& v : eig.values) v = std::max(v, 0.0);

    res.model.components = Matrix(p, d);
    res.model.explained_variance.resize(p);
    res.model.explained_variance_ratio.resize(p);
    for (size_t c = 0; c < p; ++c) {
        // flip so the largest-|loading| entry is positive (first on ties)
        size_t arg = 0;
        double best = -1.0;
        for (size_t j = 0; j < d; ++j) {
            double mag = std::abs(eig.vectors.at(j, c));
            if (mag > best) {
                best = mag;
                arg = j;
            }
        }
        double sign = eig.vectors.at(arg, c) < 0.0 ? -1.0 : 1.0;
        for (size_t j = 0; j < d; ++j) res.model.components.at(c, j) = sign * eig.vectors.at(j, c);
        res.model.explained_variance[c] = eig.values[c];
        res.model.explained_variance_ratio[c] =
            res.model.total_variance > 0.0 ? eig.values[c] / res.model.total_variance : 0.0;
    }

    res.embedding.points = Matrix(n, p);
    for (size_t i = 0; i < n; ++i) {
        const double* r = xc.row(i);
        double* o = res.embedding.points.row(i);
        for (size_t c = 0; c < p; ++c) {
            double s = 0.0;
            const double* comp = res.model.components.row(c);
            for (size_t j = 0; j < d; ++j) s += r[j] * comp[j];
            o[c] = s;
        }
    }
    res.embedding.method = "pca";
    res.embedding.params = {{"p", p}};
    res.embedding.row_ids = X.row_ids;
    return res;
}

// Variance-fraction mode: smallest p whose cumulative explained-variance
// ratio reaches the fraction.
inline PcaResult pca_fit_transform_fraction(const FeatureMatrix& X, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw UsageError("pca: variance fraction must be in (0,1]");
    const size_t n = X.n_rows();
    const size_t d = X.n_cols();
    if (n < 2) throw DataError("pca: need at least 2 rows");
    const size_t rank = std::min(n - 1, d);

    // Full decomposition once to find p, then reuse via the integer overload.
    PcaResult full = pca_fit_transform(X, rank);
    double cum = 0.0;
    size_t p = rank;
    for (size_t c = 0; c < rank; ++c) {
        cum += full.model.explained_variance_ratio[c];
        if (cum >= fraction - 1e-12) {
            p = c + 1;
            break;
        }
    }
    if (p == rank) {
        full.embedding.params = {{"p", p}, {"variance_fraction", fraction}};
        return full;
    }
    PcaResult res = pca_fit_transform(X, p);
    res.embedding.params = {{"p", p}, {"variance_fraction", fraction}};
    return res;
}

}  // namespace terpscape
