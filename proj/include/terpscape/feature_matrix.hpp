#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/dataset.hpp"
#include "terpscape/matrix.hpp"

namespace terpscape {

struct FeatureMatrix {
    Matrix values;  // n_rows × n_cols, NaN = missing (allowed pre-imputation)
    std::vector<ColumnInfo> columns;
    std::vector<std::string> row_ids;

    size_t n_rows() const { return values.rows; }
    size_t n_cols() const { return values.cols; }

    FeatureMatrix select_rows(const std::vector<size_t>& idx) const {
        FeatureMatrix out;
        out.columns = columns;
        out.values = Matrix(idx.size(), values.cols);
        out.row_ids.reserve(idx.size());
        for (size_t i = 0; i < idx.size(); ++i) {
            const double* src = values.row(idx[i]);
            std::copy(src, src + values.cols, out.values.row(i));
            out.row_ids.push_back(row_ids[idx[i]]);
        }
        return out;
    }

    void append_row(const FeatureMatrix& src, size_t row) {
        values.data.insert(values.data.end(), src.values.row(row),
                           src.values.row(row) + src.values.cols);
        ++values.rows;
        row_ids.push_back(src.row_ids[row]);
    }
};

inline FeatureMatrix to_feature_matrix(const RecordSet& rs) {
    FeatureMatrix fm;
    fm.columns = rs.columns;
    fm.values = Matrix(rs.records.size(), rs.columns.size());
    fm.row_ids.reserve(rs.records.size());
    for (size_t i = 0; i < rs.records.size(); ++i) {
        const auto& vals = rs.records[i].values;
        std::copy(vals.begin(), vals.end(), fm.values.row(i));
        fm.row_ids.push_back(rs.records[i].id);
    }
    return fm;
}

// Features plus integer labels; class names sorted lexicographically so every
// downstream report orders classes the same way.
struct LabeledData {
    FeatureMatrix features;
    std::vector<int> labels;
    std::vector<std::string> class_names;
};

inline LabeledData to_labeled_data(const RecordSet& rs) {
    LabeledData out;
    out.features = to_feature_matrix(rs);
    std::vector<std::string> names;
    for (const auto& r : rs.records) {
        if (!r.subclass)
            throw DataError("record '" + r.id + "' has no recognized subclass label");
        names.push_back(subclass_name(*r.subclass));
    }
    out.class_names = names;
    std::sort(out.class_names.begin(), out.class_names.end());
    out.class_names.erase(std::unique(out.class_names.begin(), out.class_names.end()),
                          out.class_names.end());
    out.labels.reserve(names.size());
    for (const auto& n : names) {
        auto it = std::lower_bound(out.class_names.begin(), out.class_names.end(), n);
        out.labels.push_back(static_cast<int>(it - out.class_names.begin()));
    }
    return out;
}

}  // namespace terpscape
