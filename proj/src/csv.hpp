#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace reldisc::detail {

/// RFC 4180 reader. Quoted fields may span lines; line() is the 1-based
/// line on which the last returned record started.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// False at end of input. Blank lines are skipped.
    bool next(std::vector<std::string>& fields);
    std::size_t line() const { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
};

/// Quotes `field` when it holds a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace reldisc::detail
