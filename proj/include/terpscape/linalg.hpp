#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "terpscape/matrix.hpp"
#include "terpscape/rng.hpp"

namespace terpscape {

struct EigenResult {
    std::vector<double> values;  // descending
    Matrix vectors;              // column j is the eigenvector for values[j]
};

// Cyclic Jacobi for a symmetric matrix. Good to machine precision for the
// small matrices this project needs (covariances, Gram matrices of modest n).
inline EigenResult jacobi_eigh(Matrix a) {
    const size_t n = a.rows;
    Matrix v(n, n, 0.0);
    for (size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

    auto off_diag_norm = [&]() {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j) s += a.at(i, j) * a.at(i, j);
        return std::sqrt(s);
    };

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = off_diag_norm();
        if (off < 1e-14 * (1.0 + std::abs(a.at(0, 0)))) break;
        bool rotated = false;
        for (size_t p = 0; p + 1 < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                double apq = a.at(p, q);
                if (apq == 0.0) continue;
                double app = a.at(p, p), aqq = a.at(q, q);
                double scale = std::abs(app) + std::abs(aqq) + std::abs(apq);
                if (scale == 0.0 || std::abs(apq) < 1e-18 * scale) continue;
                rotated = true;
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                        : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                for (size_t k = 0; k < n; ++k) {
                    double akp = a.at(k, p), akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (size_t k = 0; k < n; ++k) {
                    double apk = a.at(p, k), aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (size_t k = 0; k < n; ++k) {
                    double vkp = v.at(k, p), vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::vector<double> diag(n);
    for (size_t i = 0; i < n; ++i) diag[i] = a.at(i, i);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t x, size_t y) { return diag[x] > diag[y]; });

    EigenResult res;
    res.values.resize(n);
    res.vectors = Matrix(n, n);
    for (size_t j = 0; j < n; ++j) {
        res.values[j] = diag[order[j]];
        for (size_t i = 0; i < n; ++i) res.vectors.at(i, j) = v.at(i, order[j]);
    }
    return res;
}

// Modified Gram-Schmidt on the columns of m, in place. Returns the number of
// independent columns kept (dependent ones become zero).
inline size_t orthonormalize_columns(Matrix& m) {
    size_t kept = 0;
    for (size_t j = 0; j < m.cols; ++j) {
        for (size_t k = 0; k < j; ++k) {
            double dot = 0.0;
            for (size_t i = 0; i < m.rows; ++i) dot += m.at(i, j) * m.at(i, k);
            for (size_t i = 0; i < m.rows; ++i) m.at(i, j) -= dot * m.at(i, k);
        }
        double norm = 0.0;
        for (size_t i = 0; i < m.rows; ++i) norm += m.at(i, j) * m.at(i, j);
        norm = std::sqrt(norm);
        if (norm > 1e-12) {
            for (size_t i = 0; i < m.rows; ++i) m.at(i, j) /= norm;
            ++kept;
        } else {
            for (size_t i = 0; i < m.rows; ++i) m.at(i, j) = 0.0;
        }
    }
    return kept;
}

// Top-p eigenpairs of a symmetric PSD matrix via orthogonal (subspace)
// iteration with a final Rayleigh-Ritz rotation. Avoids a full n x n
// decomposition when only a few components are wanted.
inline EigenResult top_eigh(const Matrix& a, size_t p, size_t max_iter = 1000,
                            double tol = 1e-13) {
    const size_t n = a.rows;
    const size_t q = std::min(n, p + 4);  // oversampling stabilizes convergence
    Matrix v(n, q);
    Rng rng(0x7e59c0de);
    for (auto& x : v.data) x = rng.normal();
    orthonormalize_columns(v);

    std::vector<double> prev(q, 0.0);
    for (size_t iter = 0; iter < max_iter; ++iter) {
        Matrix w = matmul(a, v);
        // Rayleigh quotient estimates before re-orthonormalizing
        std::vector<double> est(q, 0.0);
        for (size_t j = 0; j < q; ++j) {
            double num = 0.0;
            for (size_t i = 0; i < n; ++i) num += v.at(i, j) * w.at(i, j);
            est[j] = num;
        }
        orthonormalize_columns(w);
        v = std::move(w);
        double shift = 0.0, scale = 0.0;
        for (size_t j = 0; j < q; ++j) {
            shift = std::max(shift, std::abs(est[j] - prev[j]));
            scale = std::max(scale, std::abs(est[j]));
        }
        prev = est;
        if (iter > 2 && shift <= tol * std::max(scale, 1.0)) break;
    }

    // Rayleigh-Ritz: diagonalize the projected q x q problem
    Matrix av = matmul(a, v);
    Matrix b(q, q, 0.0);
    for (size_t i = 0; i < q; ++i)
        for (size_t j = 0; j < q; ++j) {
            double s = 0.0;
            for (size_t k = 0; k < n; ++k) s += v.at(k, i) * av.at(k, j);
            b.at(i, j) = s;
        }
    // symmetrize against round-off
    for (size_t i = 0; i < q; ++i)
        for (size_t j = i + 1; j < q; ++j) {
            double m = 0.5 * (b.at(i, j) + b.at(j, i));
            b.at(i, j) = b.at(j, i) = m;
        }
    EigenResult small = jacobi_eigh(b);
    Matrix rotated = matmul(v, small.vectors);

    EigenResult res;
    size_t keep = std::min(p, q);
    res.values.assign(small.values.begin(), small.values.begin() + keep);
    res.vectors = Matrix(n, keep);
    for (size_t j = 0; j < keep; ++j)
        for (size_t i = 0; i < n; ++i) res.vectors.at(i, j) = rotated.at(i, j);
    return res;
}

}  // namespace terpscape
