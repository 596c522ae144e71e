#pragma once

#include <string>
#include <vector>

namespace combraman::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws if absent
  bool has_column(const std::string& name) const;
  std::vector<double> col(const std::string& name) const;
};

// Reads a numeric CSV with a mandatory header row. Ragged rows are
// configuration errors; optional trailing columns are handled by the
// caller via has_column.
Table read_table(const std::string& path);
Table parse_table(const std::string& text, const std::string& origin);

std::string format_table(const Table& table);

// Writes content to a temporary file in the target directory and renames
// it into place.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace combraman::csv
