#include "csv.hpp"

#include <istream>
#include <ostream>

#include "reldisc/error.hpp"

namespace reldisc::detail {

bool CsvReader::next(std::vector<std::string>& fields) {
    std::string row;
    while (true) {
        if (!std::getline(in_, row)) return false;
        ++line_;
        if (!row.empty() && row.back() == '\r') row.pop_back();
        if (!row.empty()) break;
    }
    record_line_ = line_;
    fields.clear();
    std::string field;
    bool quoted = false;
    bool after_quote = false;
    std::size_t i = 0;
    while (true) {
        if (i == row.size()) {
            if (!quoted) break;
            std::string more;
            if (!std::getline(in_, more)) throw ParseError(record_line_, "unterminated quoted field");
            ++line_;
            if (!more.empty() && more.back() == '\r') more.pop_back();
            field += '\n';
            row = std::move(more);
            i = 0;
            continue;
        }
        const char c = row[i++];
        if (quoted) {
            if (c != '"') {
                field += c;
            } else if (i < row.size() && row[i] == '"') {
                field += '"';
                ++i;
            } else {
                quoted = false;
                after_quote = true;
            }
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            after_quote = false;
        } else if (c == '"' && field.empty() && !after_quote) {
            quoted = true;
        } else if (after_quote) {
            throw ParseError(record_line_, "unexpected character after closing quote");
        } else {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return true;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

}  // namespace reldisc::detail
