#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geoloc::csv {

/// RFC 4180 reader: quoted fields may hold commas, doubled quotes and line
/// breaks. Accepts LF or CRLF record terminators.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// Next record, or nullopt at end of input. Throws FormatError on an
    /// unterminated quoted field.
    std::optional<std::vector<std::string>> next();

    /// 1-based line number where the last returned record started.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

std::string escape(std::string_view field);

void write_row(std::ostream& out, std::span<const std::string> fields);

}  // namespace geoloc::csv
