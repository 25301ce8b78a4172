#pragma once

#include <string>
#include <vector>

#include <terpscape/feature_matrix.hpp>
#include <terpscape/matrix.hpp>
#include <terpscape/rng.hpp>

namespace synth {

struct Blobs {
    terpscape::Matrix x;
    std::vector<int> labels;
};

// Isotropic Gaussian blobs: counts[c] points around centers.row(c) with the
// given per-coordinate standard deviation.
inline Blobs make_blobs(const std::vector<size_t>& counts, const terpscape::Matrix& centers,
                        double sd, uint64_t seed) {
    size_t n = 0;
    for (size_t c : counts) n += c;
    Blobs out;
    out.x = terpscape::Matrix(n, centers.cols);
    out.labels.resize(n);
    terpscape::Rng rng(seed);
    size_t row = 0;
    for (size_t c = 0; c < counts.size(); ++c) {
        for (size_t i = 0; i < counts[c]; ++i, ++row) {
            out.labels[row] = static_cast<int>(c);
            for (size_t d = 0; d < centers.cols; ++d)
                out.x.at(row, d) = centers.at(c, d) + sd * rng.normal();
        }
    }
    return out;
}

inline terpscape::FeatureMatrix wrap_features(const terpscape::Matrix& x,
                                              const std::string& prefix = "f") {
    terpscape::FeatureMatrix fm;
    fm.values = x;
    for (size_t j = 0; j < x.cols; ++j)
        fm.columns.push_back({prefix + "_" + std::to_string(j + 1),
                              terpscape::ColumnKind::continuous});
    for (size_t i = 0; i < x.rows; ++i) fm.row_ids.push_back("r" + std::to_string(i + 1));
    return fm;
}

}  // namespace synth
