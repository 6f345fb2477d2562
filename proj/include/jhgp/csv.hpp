#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace jhgp {

std::string trim(std::string_view s);
/// Splits on commas and trims each field. No quoting.
std::vector<std::string> split_row(const std::string& line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by name; throws DataError naming `source`.
  std::size_t column(const std::string& name, const std::string& source) const;
};

/// Reads a header line plus rows (blank lines skipped, BOM stripped). Rows
/// with a field count different from the header raise DataError.
CsvTable read_csv_table(std::istream& in, const std::string& source);

double parse_double(const std::string& field, const std::string& where);
long long parse_integer(const std::string& field, const std::string& where);

}  // namespace jhgp
