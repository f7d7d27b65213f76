#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace magloc::util {

std::vector<std::string> split(std::string_view line, char delimiter);
std::string trim(std::string_view s);
/// Strict full-string parse; returns false on any trailing garbage.
bool parse_double(std::string_view s, double& out);
/// Shortest decimal form that parses back to the same double.
std::string format_exact(double v);
/// printf %.*g style, used for report CSVs.
std::string format_significant(double v, int digits);
std::string hex_digest(std::string_view bytes);

}  // namespace magloc::util
