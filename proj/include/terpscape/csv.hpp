#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "terpscape/common.hpp"

namespace terpscape {

// RFC-4180 reader: quoted fields may contain separators, doubled quotes and
// newlines. CRLF and LF line endings both accepted.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    // Reads one record into fields. Returns false on clean EOF.
    bool next_record(std::vector<std::string>& fields) {
        fields.clear();
        int c = in_.get();
        if (c == std::istream::traits_type::eof()) return false;
        std::string cur;
        bool in_quotes = false;
        bool was_quoted = false;
        for (;;) {
            if (c == std::istream::traits_type::eof()) {
                if (in_quotes) throw DataError("csv: unterminated quoted field at end of input");
                fields.push_back(std::move(cur));
                return true;
            }
            char ch = static_cast<char>(c);
            if (in_quotes) {
                if (ch == '"') {
                    int peek = in_.peek();
                    if (peek == '"') {
                        in_.get();
                        cur.push_back('"');
                    } else {
                        in_quotes = false;
                    }
                } else {
                    cur.push_back(ch);
                }
            } else if (ch == '"' && cur.empty() && !was_quoted) {
                in_quotes = true;
                was_quoted = true;
            } else if (ch == ',') {
                fields.push_back(std::move(cur));
                cur.clear();
                was_quoted = false;
            } else if (ch == '\n') {
                fields.push_back(std::move(cur));
                return true;
            } else if (ch == '\r') {
                if (in_.peek() == '\n') in_.get();
                fields.push_back(std::move(cur));
                return true;
            } else {
                cur.push_back(ch);
            }
            c = in_.get();
        }
    }

private:
    std::istream& in_;
};

inline std::string csv_escape(const std::string& field) {
    bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) os.put(',');
        os << csv_escape(fields[i]);
    }
    os.put('\n');
}

}  // namespace terpscape
