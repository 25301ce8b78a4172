#pragma once

#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "terpscape/common.hpp"

namespace terpscape {

using json = nlohmann::ordered_json;

// The nine terpene subclasses this pipeline recognizes (closed set).
enum class Subclass : int {
    Monoterpenoids,
    Sesquiterpenoids,
    Diterpenoids,
    Sesterterpenoids,
    Triterpenoids,
    Polyterpenoids,
    Sesquaterpenoids,
    TerpeneGlycosides,
    TerpeneLactones,
};

constexpr size_t kSubclassCount = 9;

inline const std::array<std::string, kSubclassCount>& subclass_names() {
    static const std::array<std::string, kSubclassCount> names = {
        "Monoterpenoids",  "Sesquiterpenoids", "Diterpenoids",
        "Sesterterpenoids", "Triterpenoids",    "Polyterpenoids",
        "Sesquaterpenoids", "Terpene glycosides", "Terpene lactones",
    };
    return names;
}

inline const std::string& subclass_name(Subclass s) {
    return subclass_names()[static_cast<size_t>(s)];
}

// Case-insensitive, ignores spaces/underscores/hyphens so "TerpeneGlycosides"
// and "terpene glycosides" both resolve.
inline std::optional<Subclass> parse_subclass(std::string_view text) {
    auto norm = [](std::string_view s) {
        std::string out;
        for (char c : s) {
            if (c == ' ' || c == '_' || c == '-') continue;
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
        return out;
    };
    std::string key = norm(text);
    for (size_t i = 0; i < kSubclassCount; ++i) {
        if (key == norm(subclass_names()[i])) return static_cast<Subclass>(i);
    }
    return std::nullopt;
}

enum class ColumnKind { continuous, binary, encoded_categorical };

inline std::string column_kind_name(ColumnKind k) {
    switch (k) {
        case ColumnKind::continuous: return "continuous";
        case ColumnKind::binary: return "binary";
        case ColumnKind::encoded_categorical: return "encoded-categorical";
    }
    return "continuous";
}

inline ColumnKind parse_column_kind(const std::string& s) {
    if (s == "binary") return ColumnKind::binary;
    if (s == "encoded-categorical") return ColumnKind::encoded_categorical;
    return ColumnKind::continuous;
}

struct ColumnInfo {
    std::string name;
    ColumnKind kind = ColumnKind::continuous;
};

// Maps source columns to their roles in the pipeline. The defaults are a
// reconstruction that covers the descriptors the profiling and modelling
// stages actually consume; real exports are mapped by editing a schema file.
struct SchemaConfig {
    std::string id_column = "coconut_id";
    std::vector<std::string> drop_id_columns = {"_id"};
    std::string superclass_column = "chemicalSuperClass";
    std::string subclass_column = "chemicalSubClass";
    std::string taxa_column = "textTaxa";
    std::string bcut_column = "bcutDescriptor";
    std::string parent_column = "directParentClassification";
    std::string sugar_column = "contains_sugar";
    // canonical descriptor role -> source column
    std::vector<std::pair<std::string, std::string>> descriptor_columns = {
        {"molecular_weight", "molecular_weight"},
        {"log_p", "log_p"},
        {"np_likeness", "np_likeness"},
        {"hba_count", "hba_count"},
        {"hbd_count", "hbd_count"},
    };
    // additional numeric source columns kept under their own names
    std::vector<std::string> extra_numeric_columns;
    std::vector<std::string> null_tokens = {"", "NULL", "null", "NaN"};
    double drop_threshold = 0.70;
    // canonical (already expanded) input: taxa flags, bcut_k and
    // parent_class_code arrive as plain numeric columns
    bool expanded = false;

    bool is_null_token(const std::string& trimmed) const {
        for (const auto& t : null_tokens)
            if (trimmed == t) return true;
        return false;
    }

    json to_json() const {
        json j;
        j["id_column"] = id_column;
        j["drop_id_columns"] = drop_id_columns;
        j["superclass_column"] = superclass_column;
        j["subclass_column"] = subclass_column;
        j["taxa_column"] = taxa_column;
        j["bcut_column"] = bcut_column;
        j["parent_column"] = parent_column;
        j["sugar_column"] = sugar_column;
        json desc = json::object();
        for (const auto& [role, col] : descriptor_columns) desc[role] = col;
        j["descriptor_columns"] = desc;
        j["extra_numeric_columns"] = extra_numeric_columns;
        j["null_tokens"] = null_tokens;
        j["drop_threshold"] = drop_threshold;
        j["expanded"] = expanded;
        return j;
    }

    static SchemaConfig from_json(const json& j) {
        SchemaConfig s;
        auto str = [&](const char* key, std::string& out) {
            if (j.contains(key)) out = j.at(key).get<std::string>();
        };
        str("id_column", s.id_column);
        str("superclass_column", s.superclass_column);
        str("subclass_column", s.subclass_column);
        str("taxa_column", s.taxa_column);
        str("bcut_column", s.bcut_column);
        str("parent_column", s.parent_column);
        str("sugar_column", s.sugar_column);
        if (j.contains("drop_id_columns"))
            s.drop_id_columns = j.at("drop_id_columns").get<std::vector<std::string>>();
        if (j.contains("descriptor_columns")) {
            s.descriptor_columns.clear();
            for (auto it = j.at("descriptor_columns").begin();
                 it != j.at("descriptor_columns").end(); ++it) {
                s.descriptor_columns.emplace_back(it.key(), it.value().get<std::string>());
            }
        }
        if (j.contains("extra_numeric_columns"))
            s.extra_numeric_columns =
                j.at("extra_numeric_columns").get<std::vector<std::string>>();
        if (j.contains("null_tokens"))
            s.null_tokens = j.at("null_tokens").get<std::vector<std::string>>();
        if (j.contains("drop_threshold")) s.drop_threshold = j.at("drop_threshold").get<double>();
        if (j.contains("expanded")) s.expanded = j.at("expanded").get<bool>();
        return s;
    }
};

// One natural product. Numeric descriptors live in `values`, aligned with
// RecordSet::columns; NaN marks a missing value. Raw categorical text is
// kept until expand_categoricals turns it into columns.
struct MoleculeRecord {
    std::string id;
    std::string superclass;
    std::string subclass_text;
    std::optional<Subclass> subclass;
    std::string taxa_text;
    std::vector<double> bcut;  // empty = missing; length validated at expansion
    bool bcut_present = false;
    std::string parent_text;
    std::optional<int> parent_code;
    std::vector<double> values;
};

struct ColumnStat {
    std::string name;
    size_t nulls = 0;
    size_t rows = 0;
    double null_fraction = 0.0;
};

struct RecordSet {
    std::vector<ColumnInfo> columns;
    std::vector<MoleculeRecord> records;
    bool expanded = false;
    bool has_taxa = false;
    bool has_bcut = false;
    bool has_parent = false;
    // source column names, kept for reporting after the raw text is consumed
    std::string taxa_name;
    std::string bcut_name;
    std::string parent_name;
    std::vector<std::pair<std::string, int>> parent_codes;  // first-seen order
    std::map<std::string, size_t> warning_counts;
    std::vector<std::string> notes;

    int column_index(const std::string& name) const {
        for (size_t i = 0; i < columns.size(); ++i)
            if (columns[i].name == name) return static_cast<int>(i);
        return -1;
    }

    double value(size_t record, size_t col) const { return records[record].values[col]; }

    // Null fraction per numeric column plus the raw categorical sources.
    std::vector<ColumnStat> column_stats() const {
        std::vector<ColumnStat> stats;
        const size_t n = records.size();
        for (size_t j = 0; j < columns.size(); ++j) {
            ColumnStat cs;
            cs.name = columns[j].name;
            cs.rows = n;
            for (const auto& r : records)
                if (is_missing(r.values[j])) ++cs.nulls;
            cs.null_fraction = n ? static_cast<double>(cs.nulls) / n : 0.0;
            stats.push_back(std::move(cs));
        }
        auto raw_stat = [&](const char* name, auto&& missing_fn) {
            ColumnStat cs;
            cs.name = name;
            cs.rows = n;
            for (const auto& r : records)
                if (missing_fn(r)) ++cs.nulls;
            cs.null_fraction = n ? static_cast<double>(cs.nulls) / n : 0.0;
            stats.push_back(std::move(cs));
        };
        if (has_taxa)
            raw_stat("__taxa", [](const MoleculeRecord& r) { return r.taxa_text.empty(); });
        if (has_bcut)
            raw_stat("__bcut", [](const MoleculeRecord& r) { return !r.bcut_present; });
        if (has_parent)
            raw_stat("__parent", [](const MoleculeRecord& r) { return r.parent_text.empty(); });
        return stats;
    }

    void warn(const std::string& key, size_t count = 1) { warning_counts[key] += count; }
};

inline std::array<size_t, kSubclassCount> subclass_counts(const RecordSet& rs) {
    std::array<size_t, kSubclassCount> counts{};
    for (const auto& r : rs.records)
        if (r.subclass) ++counts[static_cast<size_t>(*r.subclass)];
    return counts;
}

}  // namespace terpscape
