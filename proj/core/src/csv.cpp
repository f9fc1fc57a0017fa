#include "mixdens/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mixdens/errors.hpp"

namespace mixdens {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == name) return static_cast<int>(c);
  return -1;
}

std::vector<double> CsvTable::column_values(int c) const {
  if (c < 0 || c >= static_cast<int>(header.size()))
    throw input_error("CsvTable: column out of range");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[static_cast<std::size_t>(c)]);
  return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw data_error("write_csv: cannot open '" + path + "'");
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << ',';
    out << header[c];
  }
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw input_error("write_csv: ragged row");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
  if (!out) throw data_error("write_csv: write failed for '" + path + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("read_csv: cannot open '" + path + "'");

  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw data_error("read_csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream head(line);
  std::string field;
  while (std::getline(head, field, ',')) table.header.push_back(field);
  if (table.header.empty()) throw data_error("read_csv: missing header");

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    row.reserve(table.header.size());
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0')
        throw data_error("read_csv: bad number at line " + std::to_string(line_no));
      row.push_back(v);
    }
    if (row.size() != table.header.size())
      throw data_error("read_csv: wrong field count at line " + std::to_string(line_no));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mixdens
