#include "geoloc/csv.hpp"

#include "geoloc/errors.hpp"

namespace geoloc::csv {

std::optional<std::vector<std::string>> Reader::next() {
    if (in_.peek() == std::char_traits<char>::eof()) return std::nullopt;
    record_line_ = line_;
    std::vector<std::string> fields(1);
    bool quoted = false;
    bool at_field_start = true;
    char c;
    while (in_.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in_.peek() == '"') {
                    in_.get(c);
                    fields.back().push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line_;
                fields.back().push_back(c);
            }
            continue;
        }
        if (c == '"' && at_field_start) {
            quoted = true;
            at_field_start = false;
        } else if (c == ',') {
            fields.emplace_back();
            at_field_start = true;
        } else if (c == '\n') {
            ++line_;
            return fields;
        } else if (c == '\r' && in_.peek() == '\n') {
            // CRLF terminator; the '\n' ends the record next iteration.
        } else {
            fields.back().push_back(c);
            at_field_start = false;
        }
    }
    if (quoted) {
        throw FormatError("unterminated quoted field starting on line " + std::to_string(record_line_));
    }
    return fields;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

}  // namespace geoloc::csv
