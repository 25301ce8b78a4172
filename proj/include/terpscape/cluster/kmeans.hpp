#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/matrix.hpp"
#include "terpscape/parallel.hpp"
#include "terpscape/rng.hpp"

namespace terpscape {

struct KmeansResult {
    std::vector<int> labels;  // 0..k-1
    size_t k = 0;
    Matrix centroids;  // k × d
    double inertia = 0.0;
    std::vector<double> inertia_trace;  // objective after each assignment step
    size_t iterations = 0;
};

namespace detail {

inline Matrix kmeanspp_init(const Matrix& x, size_t k, Rng& rng) {
    const size_t n = x.rows;
    Matrix centroids(k, x.cols);
    size_t first = rng.below(n);
    std::copy(x.row(first), x.row(first) + x.cols, centroids.row(0));
    std::vector<double> d2(n);
    for (size_t i = 0; i < n; ++i) d2[i] = sq_dist(x.row(i), centroids.row(0), x.cols);
    for (size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : d2) total += v;
        size_t chosen;
        if (total > 0.0) {
            double r = rng.uniform01() * total;
            double cum = 0.0;
            chosen = n - 1;
            for (size_t i = 0; i < n; ++i) {
                cum += d2[i];
                if (r < cum) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = rng.below(n);  // all remaining mass at already-chosen points
        }
        std::copy(x.row(chosen), x.row(chosen) + x.cols, centroids.row(c));
        for (size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], sq_dist(x.row(i), centroids.row(c), x.cols));
    }
    return centroids;
}

struct LloydState {
    std::vector<int> labels;
    Matrix centroids;
    double inertia = 0.0;
    std::vector<double> trace;
    size_t iterations = 0;
};

// One assignment pass (nearest centroid, ties to the smallest index) plus
// empty-cluster repair by seizing the point currently farthest from its
// centroid; the seized point becomes the empty cluster's centroid.
inline double assign_and_repair(const Matrix& x, Matrix& centroids, std::vector<int>& labels) {
    const size_t n = x.rows;
    const size_t k = centroids.rows;
    std::vector<double> best_d(n);
    parallel_for(n, [&](size_t i) {
        const double* xi = x.row(i);
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (size_t c = 0; c < k; ++c) {
            double d = sq_dist(xi, centroids.row(c), x.cols);
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        labels[i] = arg;
        best_d[i] = best;
    });

    std::vector<size_t> counts(k, 0);
    for (int l : labels) ++counts[l];
    std::vector<bool> seized(n, false);
    for (size_t c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        size_t far = n;
        double far_d = -1.0;
        for (size_t i = 0; i < n; ++i) {
            if (seized[i] || counts[labels[i]] <= 1) continue;
            if (best_d[i] > far_d) {
                far_d = best_d[i];
                far = i;
            }
        }
        if (far == n) continue;  // nothing seizable (k near n with duplicates)
        --counts[labels[far]];
        labels[far] = static_cast<int>(c);
        ++counts[c];
        seized[far] = true;
        std::copy(x.row(far), x.row(far) + x.cols, centroids.row(c));
        best_d[far] = 0.0;
    }

    double inertia = 0.0;
    for (size_t i = 0; i < n; ++i) inertia += best_d[i];
    return inertia;
}

inline LloydState lloyd(const Matrix& x, size_t k, Rng& rng, size_t max_iter, double tol) {
    LloydState st;
    st.centroids = kmeanspp_init(x, k, rng);
    st.labels.assign(x.rows, 0);
    st.inertia = assign_and_repair(x, st.centroids, st.labels);
    st.trace.push_back(st.inertia);

    std::vector<int> prev = st.labels;
    for (size_t it = 0; it < max_iter; ++it) {
        st.iterations = it + 1;
        Matrix next(k, x.cols, 0.0);
        std::vector<size_t> counts(k, 0);
        for (size_t i = 0; i < x.rows; ++i) {
            const double* xi = x.row(i);
            double* cr = next.row(st.labels[i]);
            for (size_t j = 0; j < x.cols; ++j) cr[j] += xi[j];
            ++counts[st.labels[i]];
        }
        double shift = 0.0;
        for (size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // keep the old centroid; the next assignment pass repairs it
                std::copy(st.centroids.row(c), st.centroids.row(c) + x.cols, next.row(c));
                continue;
            }
            for (size_t j = 0; j < x.cols; ++j) next.at(c, j) /= static_cast<double>(counts[c]);
            shift = std::max(shift, std::sqrt(sq_dist(next.row(c), st.centroids.row(c), x.cols)));
        }
        st.centroids = std::move(next);
        st.inertia = assign_and_repair(x, st.centroids, st.labels);
        st.trace.push_back(st.inertia);
        if (st.labels == prev || shift < tol) break;
        prev = st.labels;
    }
    return st;
}

}  // namespace detail

// Lloyd iterations from k-means++ seeding; of n_init restarts the lowest
// inertia wins (ties: the earlier restart).
inline KmeansResult kmeans(const Matrix& x, size_t k, uint64_t seed, size_t n_init = 10,
                           size_t max_iter = 300, double tol = 1e-4) {
    if (k == 0) throw UsageError("kmeans: k must be >= 1");
    if (k > x.rows)
        throw UsageError("kmeans: k=" + std::to_string(k) + " exceeds n=" +
                         std::to_string(x.rows));
    if (n_init == 0) n_init = 1;
    for (double v : x.data)
        if (!std::isfinite(v)) throw DataError("kmeans: input must be complete and finite");

    KmeansResult best;
    bool have = false;
    for (size_t init = 0; init < n_init; ++init) {
        Rng rng(Rng::derive(seed, init));
        detail::LloydState st = detail::lloyd(x, k, rng, max_iter, tol);
        if (!have || st.inertia < best.inertia) {
            have = true;
            best.labels = std::move(st.labels);
            best.k = k;
            best.centroids = std::move(st.centroids);
            best.inertia = st.inertia;
            best.inertia_trace = std::move(st.trace);
            best.iterations = st.iterations;
        }
    }
    return best;
}

}  // namespace terpscape
