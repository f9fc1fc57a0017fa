#pragma once

#include <string>
#include <vector>

namespace mixdens {

/// Shortest-round-trip decimal rendering (17 significant digits).
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
  std::vector<double> column_values(int c) const;
};

/// Comma-separated numeric table with a header row.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

CsvTable read_csv(const std::string& path);

}  // namespace mixdens
