#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/csv.hpp"
#include "terpscape/dataset.hpp"
#include "terpscape/matrix.hpp"

namespace terpscape {

// Low-dimensional representation of a dataset, either computed here or
// imported from an external tool (UMAP et al.).
struct Embedding {
    Matrix points;  // n × d, complete
    std::string method;
    json params = json::object();
    bool imported = false;
    std::vector<std::string> row_ids;

    size_t n_rows() const { return points.rows; }
    size_t dims() const { return points.cols; }
};

// Format: one `#`-prefixed JSON comment line (method + parameters), then a
// CSV with header id,dim_1..dim_k.
inline void write_embedding(const Embedding& e, std::ostream& os) {
    json meta;
    meta["method"] = e.method;
    meta["params"] = e.params;
    os << "# " << meta.dump() << "\n";
    std::vector<std::string> row = {"id"};
    for (size_t j = 1; j <= e.dims(); ++j) row.push_back("dim_" + std::to_string(j));
    write_csv_row(os, row);
    for (size_t i = 0; i < e.n_rows(); ++i) {
        row.clear();
        row.push_back(e.row_ids[i]);
        for (size_t j = 0; j < e.dims(); ++j) row.push_back(fmt_g17(e.points.at(i, j)));
        write_csv_row(os, row);
    }
}

// Pass an empty expected_row_ids to skip the id check.
inline Embedding import_embedding(std::istream& in,
                                  const std::vector<std::string>& expected_row_ids) {
    Embedding e;
    e.imported = true;
    e.method = "imported";

    // optional metadata comment line(s)
    while (in.peek() == '#') {
        std::string line;
        std::getline(in, line);
        std::string body = trim(line.substr(1));
        if (body.empty()) continue;
        try {
            json meta = json::parse(body);
            if (meta.contains("method")) e.method = meta.at("method").get<std::string>();
            if (meta.contains("params")) e.params = meta.at("params");
        } catch (const nlohmann::json::parse_error&) {
            e.params["comment"] = body;
        }
    }

    CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next_record(header))
        throw DataError("embedding: empty file, expected id,dim_1.. header");
    if (header.empty() || trim(header[0]) != "id")
        throw DataError("embedding: header must start with 'id'");
    size_t dims = header.size() - 1;
    if (dims < 1) throw DataError("embedding: header declares no dimensions");
    for (size_t j = 1; j < header.size(); ++j) {
        if (trim(header[j]) != "dim_" + std::to_string(j))
            throw DataError("embedding: expected column 'dim_" + std::to_string(j) + "', got '" +
                            trim(header[j]) + "'");
    }

    std::vector<std::string> fields;
    std::vector<double> values;
    size_t row = 0;
    while (reader.next_record(fields)) {
        ++row;
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;
        if (fields.size() != header.size())
            throw DataError("embedding: row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        std::string id = trim(fields[0]);
        if (!expected_row_ids.empty()) {
            if (row > expected_row_ids.size())
                throw DataError("embedding: more rows than the dataset (" +
                                std::to_string(expected_row_ids.size()) + ")");
            if (id != expected_row_ids[row - 1])
                throw DataError("embedding: row " + std::to_string(row) + " id '" + id +
                                "' does not match dataset id '" + expected_row_ids[row - 1] +
                                "'");
        }
        e.row_ids.push_back(std::move(id));
        for (size_t j = 1; j < fields.size(); ++j) {
            double v;
            if (!try_parse_double(trim(fields[j]), v) || !std::isfinite(v))
                throw DataError("embedding: row " + std::to_string(row) +
                                " has a non-numeric value in dim_" + std::to_string(j));
            values.push_back(v);
        }
    }
    if (!expected_row_ids.empty() && e.row_ids.size() != expected_row_ids.size())
        throw DataError("embedding: file has " + std::to_string(e.row_ids.size()) +
                        " rows, dataset has " + std::to_string(expected_row_ids.size()));
    e.points.rows = e.row_ids.size();
    e.points.cols = dims;
    e.points.data = std::move(values);
    return e;
}

inline Embedding import_embedding_file(const std::string& path,
                                       const std::vector<std::string>& expected_row_ids) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open embedding file: " + path);
    return import_embedding(in, expected_row_ids);
}

}  // namespace terpscape
