#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <string_view>

namespace geoloc {

/// Writes to a sibling temp file and renames it over `path`, so readers
/// never observe a partial file. Throws IoError.
void write_file_atomically(const std::string& path, const std::function<void(std::ostream&)>& body);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Whole-string parse; throws FormatError.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

/// Fixed-point with `digits` decimals, locale independent.
std::string format_fixed(double value, int digits);

std::string read_file(const std::string& path);

}  // namespace geoloc
