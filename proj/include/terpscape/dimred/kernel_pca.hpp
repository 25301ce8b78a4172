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
#include "terpscape/parallel.hpp"

namespace terpscape {

enum class Kernel { rbf, linear };

// Kernel PCA on a double-centered Gram matrix; embedding column c is
// sqrt(λ_c) · v_c, which for the linear kernel equals the PCA projection up
// to sign. Components whose eigenvalue falls below the numerical floor are
// dropped with a warning recorded in the embedding parameters.
inline Embedding kernel_pca(const FeatureMatrix& X, double gamma, size_t p,
                            Kernel kernel = Kernel::rbf, size_t max_n = 20000) {
    const size_t n = X.n_rows();
    const size_t d = X.n_cols();
    if (n < 2) throw DataError("kernel_pca: need at least 2 rows (no pairs to relate)");
    if (n > max_n)
        throw UsageError("kernel_pca: n=" + std::to_string(n) + " exceeds the n<=" +
                         std::to_string(max_n) + " kernel-matrix guard");
    if (kernel == Kernel::rbf && !(gamma > 0.0)) throw UsageError("kernel_pca: gamma must be > 0");
    if (p == 0) throw UsageError("kernel_pca: p must be >= 1");
    if (p > n - 1)
        throw UsageError("kernel_pca: p=" + std::to_string(p) + " exceeds attainable rank " +
                         std::to_string(n - 1));
    detail::require_complete(X.values, "kernel_pca");

    Matrix k(n, n);
    parallel_for(n, [&](size_t i) {
        const double* xi = X.values.row(i);
        for (size_t j = i; j < n; ++j) {
            double v;
            if (kernel == Kernel::rbf) {
                v = std::exp(-gamma * sq_dist(xi, X.values.row(j), d));
            } else {
                v = 0.0;
                const double* xj = X.values.row(j);
                for (size_t t = 0; t < d; ++t) v += xi[t] * xj[t];
            }
            k.at(i, j) = v;
            k.at(j, i) = v;
        }
    });

    // double-centering: K' = K - 1K/n - K1/n + 1K1/n²
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (size_t j = 0; j < n; ++j) s += k.at(i, j);
        row_mean[i] = s / n;
        grand += s;
    }
    grand /= static_cast<double>(n) * n;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) k.at(i, j) += grand - row_mean[i] - row_mean[j];

    EigenResult eig = top_eigh(k, p);

    double floor = 1e-10 * std::max(eig.values.empty() ? 0.0 : eig.values[0], 0.0) + 1e-12;
    size_t kept = 0;
    while (kept < p && kept < eig.values.size() && eig.values[kept] > floor) ++kept;

    Embedding e;
    e.points = Matrix(n, kept);
    for (size_t c = 0; c < kept; ++c) {
        double scale = std::sqrt(eig.values[c]);
        // deterministic sign: largest-|entry| coordinate positive
        size_t arg = 0;
        double best = -1.0;
        for (size_t i = 0; i < n; ++i) {
            double mag = std::abs(eig.vectors.at(i, c));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        double sign = eig.vectors.at(arg, c) < 0.0 ? -1.0 : 1.0;
        for (size_t i = 0; i < n; ++i) e.points.at(i, c) = sign * scale * eig.vectors.at(i, c);
    }
    e.method = "kpca";
    e.params = {{"kernel", kernel == Kernel::rbf ? "rbf" : "linear"},
                {"p", p},
                {"returned_components", kept}};
    if (kernel == Kernel::rbf) e.params["gamma"] = gamma;
    if (kept < p)
        e.params["warning"] = "eigenvalues below the numerical floor: returned " +
                              std::to_string(kept) + " of " + std::to_string(p) + " components";
    e.row_ids = X.row_ids;
    return e;
}

}  // namespace terpscape
