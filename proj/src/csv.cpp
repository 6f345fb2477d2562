#include "jhgp/csv.hpp"

#include <charconv>
#include <istream>
#include <limits>

#include "jhgp/errors.hpp"

namespace jhgp {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(std::string_view(line).substr(pos, comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::size_t CsvTable::column(const std::string& name, const std::string& source) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw DataError(source + ": missing column '" + name + "'");
}

CsvTable read_csv_table(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty file");
  t.header = split_row(line);
  if (!t.header.empty() && t.header[0].rfind("\xEF\xBB\xBF", 0) == 0) t.header[0].erase(0, 3);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    auto f = split_row(line);
    if (f.size() != t.header.size()) {
      throw DataError(source + " row " + std::to_string(row) + ": expected " + std::to_string(t.header.size()) +
                      " fields, got " + std::to_string(f.size()));
    }
    t.rows.push_back(std::move(f));
  }
  return t;
}

double parse_double(const std::string& field, const std::string& where) {
  double v = 0.0;
  if (field == "NA" || field == "nan") return std::numeric_limits<double>::quiet_NaN();
  const char* b = field.data();
  const char* e = b + field.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) throw DataError(where + ": cannot parse number '" + field + "'");
  return v;
}

long long parse_integer(const std::string& field, const std::string& where) {
  long long v = 0;
  const char* b = field.data();
  const char* e = b + field.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) throw DataError(where + ": cannot parse integer '" + field + "'");
  return v;
}

}  // namespace jhgp
