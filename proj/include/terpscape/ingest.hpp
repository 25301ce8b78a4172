#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "terpscape/common.hpp"
#include "terpscape/csv.hpp"
#include "terpscape/dataset.hpp"

namespace terpscape {

enum class SourceFormat { csv, jsonl };

namespace detail {

// "[1.2, 3.4]" or "1.2;3.4" -> values; elements that fail to parse are NaN.
inline std::vector<double> parse_number_array(const std::string& raw) {
    std::string body = trim(raw);
    if (!body.empty() && body.front() == '[') body.erase(body.begin());
    if (!body.empty() && body.back() == ']') body.pop_back();
    std::vector<double> out;
    if (trim(body).empty()) return out;
    std::string sep_normalized = body;
    std::replace(sep_normalized.begin(), sep_normalized.end(), ';', ',');
    for (const auto& tok : split(sep_normalized, ',')) {
        double v = kMissing;
        std::string t = trim(tok);
        if (!t.empty()) try_parse_double(t, v);
        out.push_back(v);
    }
    return out;
}

inline double parse_numeric_cell(const std::string& raw, const SchemaConfig& schema,
                                 RecordSet& rs) {
    std::string t = trim(raw);
    if (schema.is_null_token(t)) return kMissing;
    double v;
    if (!try_parse_double(t, v)) {
        rs.warn("unparseable_numeric");
        return kMissing;
    }
    return v;
}

// Descriptor sanity checks from the record invariants; violations become
// missing values rather than hard errors so one bad export row cannot abort
// a 400k-row parse.
inline double check_descriptor_value(const std::string& canonical_name, double v, RecordSet& rs) {
    if (is_missing(v)) return v;
    if (canonical_name == "molecular_weight" && v <= 0) {
        rs.warn("invalid_molecular_weight");
        return kMissing;
    }
    if ((canonical_name == "hba_count" || canonical_name == "hbd_count") && v < 0) {
        rs.warn("invalid_" + canonical_name);
        return kMissing;
    }
    if (canonical_name == "contains_sugar" && v != 0.0 && v != 1.0) {
        rs.warn("invalid_contains_sugar");
        return kMissing;
    }
    if (canonical_name.rfind("taxa_", 0) == 0 && v != 0.0 && v != 1.0) {
        rs.warn("invalid_taxa_flag");
        return kMissing;
    }
    return v;
}

inline ColumnKind canonical_kind(const std::string& name) {
    if (name == "contains_sugar" || name.rfind("taxa_", 0) == 0) return ColumnKind::binary;
    if (name == "parent_class_code") return ColumnKind::encoded_categorical;
    return ColumnKind::continuous;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// parse_dataset

inline RecordSet parse_dataset_csv(std::istream& in, const SchemaConfig& schema) {
    CsvReader reader(in);
    std::vector<std::string> header;
    if (!reader.next_record(header) || (header.size() == 1 && trim(header[0]).empty()))
        throw SchemaError("csv: empty input, expected a header row");
    for (auto& h : header) h = trim(h);
    std::map<std::string, int> col_of;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i].empty()) throw SchemaError("csv: header has an unnamed column");
        if (!col_of.emplace(header[i], static_cast<int>(i)).second)
            throw SchemaError("csv: duplicate column '" + header[i] + "' in header");
    }
    auto find_col = [&](const std::string& name) -> int {
        auto it = col_of.find(name);
        return it == col_of.end() ? -1 : it->second;
    };
    auto require_col = [&](const std::string& name, const char* role) -> int {
        int idx = find_col(name);
        if (idx < 0)
            throw SchemaError(std::string("schema: ") + role + " column '" + name +
                              "' not found in header");
        return idx;
    };

    RecordSet rs;
    rs.expanded = schema.expanded;
    int id_col = schema.id_column.empty() ? -1 : require_col(schema.id_column, "id");
    int subclass_col = schema.subclass_column.empty()
                           ? -1
                           : require_col(schema.subclass_column, "subclass");
    int superclass_col = -1, taxa_col = -1, bcut_col = -1, parent_col = -1;

    std::vector<int> value_cols;  // header index per rs.columns entry
    std::set<int> consumed;
    if (id_col >= 0) consumed.insert(id_col);
    if (subclass_col >= 0) consumed.insert(subclass_col);

    if (!schema.expanded) {
        if (!schema.superclass_column.empty()) {
            superclass_col = find_col(schema.superclass_column);
            if (superclass_col < 0) rs.notes.push_back("superclass column absent from source");
        }
        auto optional_role = [&](const std::string& name, bool& flag, std::string& store) -> int {
            store = name;
            if (name.empty()) return -1;
            int idx = find_col(name);
            flag = idx >= 0;
            if (idx < 0) rs.notes.push_back("column '" + name + "' absent from source");
            return idx;
        };
        taxa_col = optional_role(schema.taxa_column, rs.has_taxa, rs.taxa_name);
        bcut_col = optional_role(schema.bcut_column, rs.has_bcut, rs.bcut_name);
        parent_col = optional_role(schema.parent_column, rs.has_parent, rs.parent_name);
        for (int c : {superclass_col, taxa_col, bcut_col, parent_col})
            if (c >= 0) consumed.insert(c);

        for (const auto& [role, source] : schema.descriptor_columns) {
            int idx = require_col(source, role.c_str());
            rs.columns.push_back({role, ColumnKind::continuous});
            value_cols.push_back(idx);
            consumed.insert(idx);
        }
        for (const auto& source : schema.extra_numeric_columns) {
            int idx = require_col(source, "extra numeric");
            rs.columns.push_back({source, ColumnKind::continuous});
            value_cols.push_back(idx);
            consumed.insert(idx);
        }
        if (!schema.sugar_column.empty()) {
            int idx = find_col(schema.sugar_column);
            if (idx >= 0) {
                rs.columns.push_back({"contains_sugar", ColumnKind::binary});
                value_cols.push_back(idx);
                consumed.insert(idx);
            } else {
                rs.notes.push_back("column '" + schema.sugar_column + "' absent from source");
            }
        }
    } else {
        // Canonical input: every non-key column is already numeric.
        for (size_t i = 0; i < header.size(); ++i) {
            if (consumed.count(static_cast<int>(i))) continue;
            if (std::find(schema.drop_id_columns.begin(), schema.drop_id_columns.end(),
                          header[i]) != schema.drop_id_columns.end())
                continue;
            rs.columns.push_back({header[i], detail::canonical_kind(header[i])});
            value_cols.push_back(static_cast<int>(i));
        }
    }

    size_t ignored = 0;
    for (size_t i = 0; i < header.size(); ++i) {
        if (!consumed.count(static_cast<int>(i)) &&
            std::find(value_cols.begin(), value_cols.end(), static_cast<int>(i)) ==
                value_cols.end())
            ++ignored;
    }
    if (ignored)
        rs.notes.push_back("ignored " + std::to_string(ignored) +
                           " source column(s) not named in the schema");

    std::vector<std::string> fields;
    size_t row = 0;
    while (reader.next_record(fields)) {
        ++row;
        if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank trailing line
        if (fields.size() != header.size())
            throw DataError("csv: row " + std::to_string(row) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
        MoleculeRecord rec;
        rec.id = id_col >= 0 ? trim(fields[id_col]) : "row_" + std::to_string(row);
        if (subclass_col >= 0) {
            rec.subclass_text = trim(fields[subclass_col]);
            if (schema.is_null_token(rec.subclass_text)) rec.subclass_text.clear();
            rec.subclass = parse_subclass(rec.subclass_text);
        }
        if (superclass_col >= 0) {
            rec.superclass = trim(fields[superclass_col]);
            if (schema.is_null_token(rec.superclass)) rec.superclass.clear();
        }
        if (taxa_col >= 0) {
            rec.taxa_text = trim(fields[taxa_col]);
            if (schema.is_null_token(rec.taxa_text)) rec.taxa_text.clear();
        }
        if (bcut_col >= 0) {
            std::string raw = trim(fields[bcut_col]);
            if (!schema.is_null_token(raw)) {
                rec.bcut_present = true;
                rec.bcut = detail::parse_number_array(raw);
            }
        }
        if (parent_col >= 0) {
            rec.parent_text = trim(fields[parent_col]);
            if (schema.is_null_token(rec.parent_text)) rec.parent_text.clear();
        }
        rec.values.reserve(rs.columns.size());
        for (size_t j = 0; j < value_cols.size(); ++j) {
            double v = detail::parse_numeric_cell(fields[value_cols[j]], schema, rs);
            rec.values.push_back(detail::check_descriptor_value(rs.columns[j].name, v, rs));
        }
        rs.records.push_back(std::move(rec));
    }
    return rs;
}

inline RecordSet parse_dataset_jsonl(std::istream& in, const SchemaConfig& schema) {
    RecordSet rs;
    rs.expanded = schema.expanded;
    rs.taxa_name = schema.taxa_column;
    rs.bcut_name = schema.bcut_column;
    rs.parent_name = schema.parent_column;

    // Column layout is fixed up front from the schema (JSONL has no header).
    std::vector<std::string> value_keys;
    if (!schema.expanded) {
        for (const auto& [role, source] : schema.descriptor_columns) {
            rs.columns.push_back({role, ColumnKind::continuous});
            value_keys.push_back(source);
        }
        for (const auto& source : schema.extra_numeric_columns) {
            rs.columns.push_back({source, ColumnKind::continuous});
            value_keys.push_back(source);
        }
        if (!schema.sugar_column.empty()) {
            rs.columns.push_back({"contains_sugar", ColumnKind::binary});
            value_keys.push_back(schema.sugar_column);
        }
        rs.has_taxa = !schema.taxa_column.empty();
        rs.has_bcut = !schema.bcut_column.empty();
        rs.has_parent = !schema.parent_column.empty();
    }

    auto text_of = [](const json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        if (v.is_number()) return fmt_g17(v.get<double>());
        if (v.is_array()) {
            std::string out;
            for (const auto& e : v) {
                if (!out.empty()) out.push_back(';');
                out += e.is_string() ? e.get<std::string>() : e.dump();
            }
            return out;
        }
        return "";
    };
    auto numeric_of = [&](const json& obj, const std::string& key) -> double {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return kMissing;
        if (it->is_number()) return it->get<double>();
        if (it->is_boolean()) return it->get<bool>() ? 1.0 : 0.0;
        if (it->is_string()) return detail::parse_numeric_cell(it->get<std::string>(), schema, rs);
        rs.warn("non_scalar_numeric");
        return kMissing;
    };

    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError("jsonl: line " + std::to_string(row) + ": " + e.what());
        }
        if (!obj.is_object())
            throw DataError("jsonl: line " + std::to_string(row) + ": expected an object");

        if (schema.expanded && rs.columns.empty()) {
            // Derive the column set from the first record.
            for (auto it = obj.begin(); it != obj.end(); ++it) {
                const std::string& key = it.key();
                if (key == schema.id_column || key == schema.subclass_column ||
                    key == schema.superclass_column)
                    continue;
                if (std::find(schema.drop_id_columns.begin(), schema.drop_id_columns.end(),
                              key) != schema.drop_id_columns.end())
                    continue;
                rs.columns.push_back({key, detail::canonical_kind(key)});
                value_keys.push_back(key);
            }
        }

        MoleculeRecord rec;
        rec.id = obj.contains(schema.id_column) ? text_of(obj.at(schema.id_column))
                                                : "row_" + std::to_string(row);
        if (!schema.subclass_column.empty() && obj.contains(schema.subclass_column)) {
            rec.subclass_text = trim(text_of(obj.at(schema.subclass_column)));
            if (schema.is_null_token(rec.subclass_text)) rec.subclass_text.clear();
            rec.subclass = parse_subclass(rec.subclass_text);
        }
        if (!schema.superclass_column.empty() && obj.contains(schema.superclass_column)) {
            rec.superclass = trim(text_of(obj.at(schema.superclass_column)));
            if (schema.is_null_token(rec.superclass)) rec.superclass.clear();
        }
        if (rs.has_taxa && obj.contains(schema.taxa_column)) {
            rec.taxa_text = trim(text_of(obj.at(schema.taxa_column)));
            if (schema.is_null_token(rec.taxa_text)) rec.taxa_text.clear();
        }
        if (rs.has_bcut && obj.contains(schema.bcut_column)) {
            const json& bv = obj.at(schema.bcut_column);
            if (bv.is_array()) {
                rec.bcut_present = true;
                for (const auto& e : bv)
                    rec.bcut.push_back(e.is_number() ? e.get<double>() : kMissing);
            } else if (bv.is_string()) {
                std::string raw = trim(bv.get<std::string>());
                if (!schema.is_null_token(raw)) {
                    rec.bcut_present = true;
                    rec.bcut = detail::parse_number_array(raw);
                }
            }
        }
        if (rs.has_parent && obj.contains(schema.parent_column)) {
            rec.parent_text = trim(text_of(obj.at(schema.parent_column)));
            if (schema.is_null_token(rec.parent_text)) rec.parent_text.clear();
        }
        rec.values.reserve(rs.columns.size());
        for (size_t j = 0; j < value_keys.size(); ++j) {
            double v = numeric_of(obj, value_keys[j]);
            rec.values.push_back(detail::check_descriptor_value(rs.columns[j].name, v, rs));
        }
        rs.records.push_back(std::move(rec));
    }
    return rs;
}

inline RecordSet parse_dataset(std::istream& in, const SchemaConfig& schema,
                               SourceFormat format) {
    RecordSet rs = format == SourceFormat::csv ? parse_dataset_csv(in, schema)
                                               : parse_dataset_jsonl(in, schema);
    if (!schema.expanded) {
        rs.taxa_name = schema.taxa_column;
        rs.bcut_name = schema.bcut_column;
        rs.parent_name = schema.parent_column;
    }
    return rs;
}

inline SourceFormat sniff_format(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : to_lower(path.substr(dot));
    return (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") ? SourceFormat::jsonl
                                                                   : SourceFormat::csv;
}

inline RecordSet parse_dataset_file(const std::string& path, const SchemaConfig& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open input file: " + path);
    return parse_dataset(in, schema, sniff_format(path));
}

// ---------------------------------------------------------------------------
// filter_taxonomy

// Keeps records whose superclass matches (case-insensitive; empty string
// disables the check) and whose subclass is in the given set.
inline RecordSet filter_taxonomy(const RecordSet& rs, const std::string& superclass,
                                 const std::vector<Subclass>& subclasses) {
    RecordSet out = rs;
    out.records.clear();
    std::array<bool, kSubclassCount> wanted{};
    for (Subclass s : subclasses) wanted[static_cast<size_t>(s)] = true;
    for (const auto& r : rs.records) {
        if (!superclass.empty() && !iequals(trim(r.superclass), trim(superclass))) continue;
        if (!r.subclass || !wanted[static_cast<size_t>(*r.subclass)]) continue;
        out.records.push_back(r);
    }
    auto counts = subclass_counts(out);
    std::string note = "filter kept " + std::to_string(out.records.size()) + " records:";
    for (size_t i = 0; i < kSubclassCount; ++i)
        if (wanted[i]) note += " " + subclass_names()[i] + "=" + std::to_string(counts[i]);
    out.notes.push_back(note);
    if (out.records.empty()) out.warn("empty_filter_result");
    return out;
}

// ---------------------------------------------------------------------------
// drop_sparse_columns

struct DropResult {
    RecordSet rs;
    std::vector<std::string> dropped;
};

// Drops every column whose null fraction exceeds the threshold (strictly
// greater). The raw taxa/BCUT/parent sources participate under their source
// column names.
inline DropResult drop_sparse_columns(const RecordSet& rs, double threshold) {
    if (threshold < 0.0 || threshold > 1.0)
        throw UsageError("drop threshold must be within [0,1]");
    DropResult res;
    res.rs = rs;
    const size_t n = rs.records.size();
    auto frac = [&](size_t nulls) { return n ? static_cast<double>(nulls) / n : 0.0; };

    std::vector<size_t> keep;
    for (size_t j = 0; j < rs.columns.size(); ++j) {
        size_t nulls = 0;
        for (const auto& r : rs.records)
            if (is_missing(r.values[j])) ++nulls;
        if (frac(nulls) > threshold)
            res.dropped.push_back(rs.columns[j].name);
        else
            keep.push_back(j);
    }
    if (keep.size() != rs.columns.size()) {
        res.rs.columns.clear();
        for (size_t j : keep) res.rs.columns.push_back(rs.columns[j]);
        for (auto& r : res.rs.records) {
            std::vector<double> vals;
            vals.reserve(keep.size());
            for (size_t j : keep) vals.push_back(r.values[j]);
            r.values = std::move(vals);
        }
    }

    if (rs.has_taxa) {
        size_t nulls = 0;
        for (const auto& r : rs.records)
            if (r.taxa_text.empty()) ++nulls;
        if (frac(nulls) > threshold) {
            res.dropped.push_back(rs.taxa_name.empty() ? "taxa" : rs.taxa_name);
            res.rs.has_taxa = false;
            for (auto& r : res.rs.records) r.taxa_text.clear();
        }
    }
    if (rs.has_bcut) {
        size_t nulls = 0;
        for (const auto& r : rs.records)
            if (!r.bcut_present) ++nulls;
        if (frac(nulls) > threshold) {
            res.dropped.push_back(rs.bcut_name.empty() ? "bcut" : rs.bcut_name);
            res.rs.has_bcut = false;
            for (auto& r : res.rs.records) {
                r.bcut.clear();
                r.bcut_present = false;
            }
        }
    }
    if (rs.has_parent) {
        size_t nulls = 0;
        for (const auto& r : rs.records)
            if (r.parent_text.empty()) ++nulls;
        if (frac(nulls) > threshold) {
            res.dropped.push_back(rs.parent_name.empty() ? "parent" : rs.parent_name);
            res.rs.has_parent = false;
            for (auto& r : res.rs.records) r.parent_text.clear();
        }
    }
    if (!res.dropped.empty()) {
        std::string note = "dropped sparse column(s):";
        for (const auto& d : res.dropped) note += " " + d;
        res.rs.notes.push_back(note);
    }
    return res;
}

// ---------------------------------------------------------------------------
// expand_categoricals

inline RecordSet expand_categoricals(const RecordSet& rs) {
    if (rs.expanded) {
        RecordSet copy = rs;
        copy.notes.push_back("expand: dataset already expanded, no-op");
        return copy;
    }
    RecordSet out = rs;
    out.columns.clear();
    out.parent_codes.clear();

    static const std::array<const char*, 4> taxa_flags = {"taxa_plants", "taxa_marine",
                                                          "taxa_bacteria", "taxa_fungi"};
    static const std::array<const char*, 4> taxa_keys = {"plants", "marine", "bacteria",
                                                         "fungi"};

    if (rs.has_parent)
        out.columns.push_back({"parent_class_code", ColumnKind::encoded_categorical});
    if (rs.has_taxa)
        for (const char* name : taxa_flags)
            out.columns.push_back({name, ColumnKind::binary});

    // Existing numeric columns keep their order, except contains_sugar moves
    // next to the other binary flags.
    int sugar_idx = rs.column_index("contains_sugar");
    if (sugar_idx >= 0) out.columns.push_back(rs.columns[sugar_idx]);
    std::vector<size_t> carried;
    for (size_t j = 0; j < rs.columns.size(); ++j) {
        if (static_cast<int>(j) == sugar_idx) continue;
        carried.push_back(j);
    }
    for (size_t j : carried) out.columns.push_back(rs.columns[j]);
    if (rs.has_bcut)
        for (int k = 1; k <= 6; ++k)
            out.columns.push_back({"bcut_" + std::to_string(k), ColumnKind::continuous});

    std::map<std::string, int> parent_code_of;
    size_t bad_bcut = 0;
    for (size_t i = 0; i < rs.records.size(); ++i) {
        const MoleculeRecord& src = rs.records[i];
        MoleculeRecord& dst = out.records[i];
        dst.values.clear();
        dst.values.reserve(out.columns.size());

        if (rs.has_parent) {
            if (src.parent_text.empty()) {
                dst.parent_code.reset();
                dst.values.push_back(kMissing);
            } else {
                auto it = parent_code_of.find(src.parent_text);
                if (it == parent_code_of.end()) {
                    int code = static_cast<int>(out.parent_codes.size());
                    it = parent_code_of.emplace(src.parent_text, code).first;
                    out.parent_codes.emplace_back(src.parent_text, code);
                }
                dst.parent_code = it->second;
                dst.values.push_back(static_cast<double>(it->second));
            }
        }
        if (rs.has_taxa) {
            std::string lowered = to_lower(src.taxa_text);
            for (const char* key : taxa_keys)
                dst.values.push_back(lowered.find(key) != std::string::npos ? 1.0 : 0.0);
        }
        if (sugar_idx >= 0) dst.values.push_back(src.values[sugar_idx]);
        for (size_t j : carried) dst.values.push_back(src.values[j]);
        if (rs.has_bcut) {
            if (src.bcut_present && src.bcut.size() == 6) {
                for (double v : src.bcut) dst.values.push_back(v);
            } else {
                if (src.bcut_present && src.bcut.size() != 6) ++bad_bcut;
                for (int k = 0; k < 6; ++k) dst.values.push_back(kMissing);
            }
        }
        dst.taxa_text.clear();
        dst.bcut.clear();
        dst.bcut_present = false;
        dst.parent_text.clear();
    }
    if (bad_bcut) out.warn("bcut_bad_length", bad_bcut);
    out.expanded = true;
    out.has_taxa = false;
    out.has_bcut = false;
    out.has_parent = false;
    return out;
}

// ---------------------------------------------------------------------------
// canonical output + sidecar

inline void write_canonical_csv(const RecordSet& rs, std::ostream& out) {
    std::vector<std::string> row = {"id", "subclass"};
    for (const auto& c : rs.columns) row.push_back(c.name);
    write_csv_row(out, row);
    for (const auto& r : rs.records) {
        row.clear();
        row.push_back(r.id);
        row.push_back(r.subclass ? subclass_name(*r.subclass) : r.subclass_text);
        for (double v : r.values) row.push_back(is_missing(v) ? "" : fmt_g17(v));
        write_csv_row(out, row);
    }
}

// Schema that re-parses a canonical CSV emitted by write_canonical_csv.
inline SchemaConfig canonical_schema() {
    SchemaConfig s;
    s.id_column = "id";
    s.subclass_column = "subclass";
    s.superclass_column.clear();
    s.taxa_column.clear();
    s.bcut_column.clear();
    s.parent_column.clear();
    s.sugar_column.clear();
    s.descriptor_columns.clear();
    s.extra_numeric_columns.clear();
    s.drop_id_columns.clear();
    s.expanded = true;
    return s;
}

inline json ingest_sidecar(const RecordSet& rs, const SchemaConfig& source_schema,
                           const std::vector<std::string>& dropped) {
    json j;
    j["record_count"] = rs.records.size();
    json cols = json::array();
    for (const auto& c : rs.columns)
        cols.push_back({{"name", c.name}, {"kind", column_kind_name(c.kind)}});
    j["columns"] = cols;
    auto counts = subclass_counts(rs);
    json sc = json::object();
    for (size_t i = 0; i < kSubclassCount; ++i)
        if (counts[i]) sc[subclass_names()[i]] = counts[i];
    j["subclass_counts"] = sc;
    j["dropped_columns"] = dropped;
    json codes = json::object();
    for (const auto& [name, code] : rs.parent_codes) codes[name] = code;
    j["parent_code_map"] = codes;
    json warns = json::object();
    for (const auto& [key, count] : rs.warning_counts) warns[key] = count;
    j["warnings"] = warns;
    j["notes"] = rs.notes;
    j["source_schema"] = source_schema.to_json();
    j["canonical_schema"] = canonical_schema().to_json();
    return j;
}

}  // namespace terpscape
