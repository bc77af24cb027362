#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace netleak::csv {

/// Streaming RFC 4180-style reader: quoted fields, doubled quotes,
/// embedded commas and newlines. Rows are returned as raw strings.
class Reader {
  public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Next record, or nullopt at end of stream. Blank lines are skipped.
    std::optional<std::vector<std::string>> next();

    /// 1-based line number of the first line of the record last returned.
    std::size_t line_number() const { return record_line_; }

  private:
    std::istream& in_;
    std::size_t current_line_ = 0;
    std::size_t record_line_ = 0;
};

/// Minimal quoting: fields containing comma, quote, CR or LF are quoted.
std::string join_row(std::span<const std::string> fields);

std::string escape_field(const std::string& field);

}  // namespace netleak::csv
