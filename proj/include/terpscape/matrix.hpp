#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "terpscape/common.hpp"

namespace terpscape {

// Dense row-major matrix of doubles. NaN encodes a missing value where the
// context allows missing data.
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double* row(size_t i) { return data.data() + i * cols; }
    const double* row(size_t i) const { return data.data() + i * cols; }

    double& at(size_t i, size_t j) { return data[i * cols + j]; }
    double at(size_t i, size_t j) const { return data[i * cols + j]; }
};

inline double sq_dist(const double* a, const double* b, size_t d) {
    double s = 0.0;
    for (size_t i = 0; i < d; ++i) {
        double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

inline double euclidean(const double* a, const double* b, size_t d) {
    return std::sqrt(sq_dist(a, b, d));
}

inline std::vector<double> column_means(const Matrix& m) {
    std::vector<double> mu(m.cols, 0.0);
    for (size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        for (size_t j = 0; j < m.cols; ++j) mu[j] += r[j];
    }
    for (auto& v : mu) v /= m.rows > 0 ? static_cast<double>(m.rows) : 1.0;
    return mu;
}

inline Matrix center_columns(const Matrix& m, const std::vector<double>& mu) {
    Matrix out(m.rows, m.cols);
    for (size_t i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        double* o = out.row(i);
        for (size_t j = 0; j < m.cols; ++j) o[j] = r[j] - mu[j];
    }
    return out;
}

// C = A * B
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.cols, 0.0);
    for (size_t i = 0; i < a.rows; ++i) {
        const double* ar = a.row(i);
        double* cr = c.row(i);
        for (size_t k = 0; k < a.cols; ++k) {
            double aik = ar[k];
            if (aik == 0.0) continue;
            const double* br = b.row(k);
            for (size_t j = 0; j < b.cols; ++j) cr[j] += aik * br[j];
        }
    }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (size_t i = 0; i < a.rows; ++i)
        for (size_t j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

}  // namespace terpscape
