#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "esn2/errors.hpp"

namespace esn2::cli {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

Dataset read_table(std::istream& in) {
  std::vector<double> y1, y2;
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const bool header_allowed = first;
    first = false;
    const std::string where = "row " + std::to_string(row);
    const auto comma = line.find(',');
    const bool two_cells = comma != std::string::npos && line.find(',', comma + 1) == std::string::npos;
    std::optional<double> a, b;
    if (two_cells) {
      a = parse_number(std::string_view(line).substr(0, comma));
      b = parse_number(std::string_view(line).substr(comma + 1));
    }
    if (!a || !b) {
      if (header_allowed) continue;
      throw UsageError(where + (two_cells ? ": cells must be numbers"
                                          : ": expected two comma-separated columns"));
    }
    if (!std::isfinite(*a) || !std::isfinite(*b)) throw UsageError(where + ": non-finite value");
    y1.push_back(*a);
    y2.push_back(*b);
  }
  if (y1.empty()) throw UsageError("data: no observations");
  return Dataset(std::move(y1), std::move(y2));
}

Dataset read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("--data: cannot open " + path);
  try {
    return read_table(in);
  } catch (const UsageError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

}  // namespace esn2::cli
