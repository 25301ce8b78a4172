#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/matrix.hpp"
#include "terpscape/parallel.hpp"
#include "terpscape/rng.hpp"

namespace terpscape {

struct ExternalScores {
    double homogeneity = 0.0;
    double completeness = 0.0;
    double v_measure = 0.0;
    double rand_index = 0.0;
    double adjusted_rand = 0.0;
    double adjusted_mutual_info = 0.0;
};

namespace detail {

inline std::vector<int> compact_labels(const std::vector<int>& raw, size_t& k) {
    std::map<int, int> remap;
    std::vector<int> out(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        auto it = remap.find(raw[i]);
        if (it == remap.end()) it = remap.emplace(raw[i], static_cast<int>(remap.size())).first;
        out[i] = it->second;
    }
    k = remap.size();
    return out;
}

// Expected mutual information under the hypergeometric model of random
// labelings with fixed marginals.
inline double expected_mutual_information(const std::vector<double>& a,
                                          const std::vector<double>& b, double n) {
    double emi = 0.0;
    for (double ai : a) {
        for (double bj : b) {
            double lo = std::max(1.0, ai + bj - n);
            double hi = std::min(ai, bj);
            for (double nij = lo; nij <= hi; nij += 1.0) {
                double t1 = (nij / n) * std::log(n * nij / (ai * bj));
                double lg = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) +
                            std::lgamma(n - ai + 1.0) + std::lgamma(n - bj + 1.0) -
                            std::lgamma(n + 1.0) - std::lgamma(nij + 1.0) -
                            std::lgamma(ai - nij + 1.0) - std::lgamma(bj - nij + 1.0) -
                            std::lgamma(n - ai - bj + nij + 1.0);
                emi += t1 * std::exp(lg);
            }
        }
    }
    return emi;
}

}  // namespace detail

// Contingency-based external validity scores; natural-log entropies.
inline ExternalScores external_metrics(const std::vector<int>& labels_true,
                                       const std::vector<int>& labels_pred) {
    if (labels_true.size() != labels_pred.size())
        throw DataError("external_metrics: label vectors differ in length");
    const size_t n = labels_true.size();
    if (n < 2) throw DataError("external_metrics: need at least 2 points");

    size_t r = 0, c = 0;
    std::vector<int> t = detail::compact_labels(labels_true, r);
    std::vector<int> p = detail::compact_labels(labels_pred, c);

    std::vector<double> cont(r * c, 0.0);
    std::vector<double> a(r, 0.0), b(c, 0.0);
    for (size_t i = 0; i < n; ++i) {
        cont[t[i] * c + p[i]] += 1.0;
        a[t[i]] += 1.0;
        b[p[i]] += 1.0;
    }
    const double dn = static_cast<double>(n);

    double h_true = 0.0, h_pred = 0.0, mi = 0.0;
    for (double ai : a)
        if (ai > 0.0) h_true -= (ai / dn) * std::log(ai / dn);
    for (double bj : b)
        if (bj > 0.0) h_pred -= (bj / dn) * std::log(bj / dn);
    for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < c; ++j) {
            double nij = cont[i * c + j];
            if (nij > 0.0) mi += (nij / dn) * std::log(dn * nij / (a[i] * b[j]));
        }

    ExternalScores s;
    s.homogeneity = h_true == 0.0 ? 1.0 : mi / h_true;
    s.completeness = h_pred == 0.0 ? 1.0 : mi / h_pred;
    s.v_measure = (s.homogeneity + s.completeness) == 0.0
                      ? 0.0
                      : 2.0 * s.homogeneity * s.completeness / (s.homogeneity + s.completeness);

    auto choose2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double pairs = choose2(dn);
    double sum_nij2 = 0.0;
    for (double v : cont) sum_nij2 += choose2(v);
    double sum_a2 = 0.0, sum_b2 = 0.0;
    for (double v : a) sum_a2 += choose2(v);
    for (double v : b) sum_b2 += choose2(v);

    double both_same = sum_nij2;
    double both_diff = pairs + sum_nij2 - sum_a2 - sum_b2;
    s.rand_index = (both_same + both_diff) / pairs;

    double expected = sum_a2 * sum_b2 / pairs;
    double max_index = 0.5 * (sum_a2 + sum_b2);
    s.adjusted_rand = (max_index - expected) == 0.0
                          ? 1.0
                          : (sum_nij2 - expected) / (max_index - expected);

    if (h_true == 0.0 && h_pred == 0.0) {
        s.adjusted_mutual_info = 1.0;
    } else {
        double emi = detail::expected_mutual_information(a, b, dn);
        double normalizer = 0.5 * (h_true + h_pred);
        double denom = normalizer - emi;
        const double eps = std::numeric_limits<double>::epsilon();
        if (denom < 0.0)
            denom = std::min(denom, -eps);
        else
            denom = std::max(denom, eps);
        s.adjusted_mutual_info = (mi - emi) / denom;
    }
    return s;
}

// Mean silhouette coefficient, exact over all pairs. Pass subsample > 0 to
// score a uniformly drawn subset when n is large.
inline double silhouette(const Matrix& x, const std::vector<int>& labels, size_t subsample = 0,
                         uint64_t seed = 0) {
    if (x.rows != labels.size())
        throw DataError("silhouette: labels length does not match row count");
    if (x.rows < 3) throw DataError("silhouette: need at least 3 points");

    if (subsample > 0 && x.rows > subsample) {
        Rng rng(seed);
        std::vector<size_t> idx = rng.sample_without_replacement(x.rows, subsample);
        std::sort(idx.begin(), idx.end());
        Matrix sub(idx.size(), x.cols);
        std::vector<int> sub_labels(idx.size());
        for (size_t i = 0; i < idx.size(); ++i) {
            std::copy(x.row(idx[i]), x.row(idx[i]) + x.cols, sub.row(i));
            sub_labels[i] = labels[idx[i]];
        }
        return silhouette(sub, sub_labels, 0, seed);
    }

    size_t k = 0;
    std::vector<int> lab = detail::compact_labels(labels, k);
    if (k < 2) throw DataError("silhouette: need at least 2 clusters");
    std::vector<size_t> counts(k, 0);
    for (int l : lab) ++counts[l];

    const size_t n = x.rows;
    std::vector<double> s(n, 0.0);
    parallel_for(n, [&](size_t i) {
        std::vector<double> sum_to(k, 0.0);
        const double* xi = x.row(i);
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sum_to[lab[j]] += euclidean(xi, x.row(j), x.cols);
        }
        size_t own = lab[i];
        if (counts[own] <= 1) {
            s[i] = 0.0;  // singleton convention
            return;
        }
        double a = sum_to[own] / static_cast<double>(counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (size_t c = 0; c < k; ++c) {
            if (c == own || counts[c] == 0) continue;
            b = std::min(b, sum_to[c] / static_cast<double>(counts[c]));
        }
        double denom = std::max(a, b);
        s[i] = denom == 0.0 ? 0.0 : (b - a) / denom;
    });
    double mean = 0.0;
    for (double v : s) mean += v;
    return mean / static_cast<double>(n);
}

}  // namespace terpscape
