#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/matrix.hpp"

namespace terpscape {

enum class Linkage { ward, average, complete, single };

inline std::string linkage_name(Linkage l) {
    switch (l) {
        case Linkage::ward: return "ward";
        case Linkage::average: return "average";
        case Linkage::complete: return "complete";
        case Linkage::single: return "single";
    }
    return "ward";
}

inline Linkage parse_linkage(const std::string& s) {
    if (s == "ward") return Linkage::ward;
    if (s == "average") return Linkage::average;
    if (s == "complete") return Linkage::complete;
    if (s == "single") return Linkage::single;
    throw UsageError("unknown linkage '" + s + "' (ward|average|complete|single)");
}

struct AgglomerativeResult {
    std::vector<int> labels;  // 0..k-1, clusters numbered by smallest member index
    size_t k = 0;
    struct Merge {
        size_t a, b;     // merged cluster slots (a < b), slot = smallest member index
        double height;   // linkage distance at the merge
        size_t size;     // resulting cluster size
    };
    std::vector<Merge> merges;  // recorded up to the k-cluster cut
};

// Bottom-up Lance–Williams merging over a condensed distance matrix. Ward
// updates run on squared Euclidean distances; the other linkages on plain
// Euclidean. Ties broken by the lexicographically smallest slot pair.
inline AgglomerativeResult agglomerative(const Matrix& x, size_t k,
                                         Linkage linkage = Linkage::ward, size_t max_n = 8000) {
    const size_t n = x.rows;
    if (k == 0) throw UsageError("agglomerative: k must be >= 1");
    if (k > n)
        throw UsageError("agglomerative: k=" + std::to_string(k) + " exceeds n=" +
                         std::to_string(n));
    if (n > max_n)
        throw UsageError("agglomerative: n=" + std::to_string(n) +
                         " exceeds the O(n²) guard n<=" + std::to_string(max_n) +
                         "; cluster a subset or an embedding instead");
    for (double v : x.data)
        if (!std::isfinite(v)) throw DataError("agglomerative: input must be complete and finite");

    AgglomerativeResult res;
    res.k = k;
    res.labels.assign(n, 0);
    if (k == n) {
        for (size_t i = 0; i < n; ++i) res.labels[i] = static_cast<int>(i);
        return res;
    }

    const bool squared = linkage == Linkage::ward;
    std::vector<double> dist(n * (n - 1) / 2);
    auto at = [n, &dist](size_t i, size_t j) -> double& {
        // i < j required
        return dist[i * (2 * n - i - 1) / 2 + (j - i - 1)];
    };
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            double d2 = sq_dist(x.row(i), x.row(j), x.cols);
            at(i, j) = squared ? d2 : std::sqrt(d2);
        }

    std::vector<bool> active(n, true);
    std::vector<size_t> size(n, 1);

    // per-slot nearest active neighbor with a larger slot id
    std::vector<double> min_d(n, std::numeric_limits<double>::infinity());
    std::vector<size_t> min_j(n, n);
    auto recompute_row = [&](size_t i) {
        min_d[i] = std::numeric_limits<double>::infinity();
        min_j[i] = n;
        if (!active[i]) return;
        for (size_t j = i + 1; j < n; ++j) {
            if (!active[j]) continue;
            double d = at(i, j);
            if (d < min_d[i]) {
                min_d[i] = d;
                min_j[i] = j;
            }
        }
    };
    for (size_t i = 0; i < n; ++i) recompute_row(i);

    size_t clusters = n;
    while (clusters > k) {
        // global minimum, lexicographically smallest pair on ties
        size_t a = n, b = n;
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < n; ++i) {
            if (!active[i] || min_j[i] == n) continue;
            if (min_d[i] < best) {
                best = min_d[i];
                a = i;
                b = min_j[i];
            }
        }
        double d_ab = at(a, b);
        for (size_t c = 0; c < n; ++c) {
            if (!active[c] || c == a || c == b) continue;
            double d_ac = c < a ? at(c, a) : at(a, c);
            double d_bc = c < b ? at(c, b) : at(b, c);
            double merged;
            switch (linkage) {
                case Linkage::ward: {
                    double na = static_cast<double>(size[a]);
                    double nb = static_cast<double>(size[b]);
                    double nc = static_cast<double>(size[c]);
                    merged = ((na + nc) * d_ac + (nb + nc) * d_bc - nc * d_ab) / (na + nb + nc);
                    break;
                }
                case Linkage::average: {
                    double na = static_cast<double>(size[a]);
                    double nb = static_cast<double>(size[b]);
                    merged = (na * d_ac + nb * d_bc) / (na + nb);
                    break;
                }
                case Linkage::complete:
                    merged = std::max(d_ac, d_bc);
                    break;
                case Linkage::single:
                default:
                    merged = std::min(d_ac, d_bc);
                    break;
            }
            (c < a ? at(c, a) : at(a, c)) = merged;
        }
        active[b] = false;
        size[a] += size[b];
        res.merges.push_back({a, b, squared ? std::sqrt(std::max(d_ab, 0.0)) : d_ab, size[a]});
        --clusters;

        // refresh the nearest-neighbor cache
        recompute_row(a);
        for (size_t i = 0; i < a; ++i) {
            if (!active[i]) continue;
            if (min_j[i] == a || min_j[i] == b) {
                recompute_row(i);
            } else {
                double d_ia = at(i, a);
                if (d_ia < min_d[i] || (d_ia == min_d[i] && a < min_j[i])) {
                    min_d[i] = d_ia;
                    min_j[i] = a;
                }
            }
        }
        for (size_t i = a + 1; i < n; ++i)
            if (active[i] && min_j[i] == b) recompute_row(i);
    }

    // union-find style: slot of each point = smallest member index of its cluster
    std::vector<size_t> slot(n);
    for (size_t i = 0; i < n; ++i) slot[i] = i;
    for (const auto& m : res.merges)
        for (size_t i = 0; i < n; ++i)
            if (slot[i] == m.b) slot[i] = m.a;

    std::vector<size_t> order;  // active slots ascending = smallest-member order
    for (size_t i = 0; i < n; ++i)
        if (active[i]) order.push_back(i);
    std::vector<int> id_of(n, -1);
    for (size_t c = 0; c < order.size(); ++c) id_of[order[c]] = static_cast<int>(c);
    for (size_t i = 0; i < n; ++i) res.labels[i] = id_of[slot[i]];
    return res;
}

}  // namespace terpscape
