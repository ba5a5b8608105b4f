#include "wcvi/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "wcvi/errors.hpp"

namespace wcvi {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot open for writing: " + path);
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j) out << ",";
    out << table.header[j];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw InvalidInputError("csv row width does not match header: " + path);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ",";
      out << format_g17(row[j]);
    }
    out << "\n";
  }
  if (!out) throw InvalidInputError("write failure: " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open: " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw InvalidInputError("empty csv: " + path);
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream rs(line);
    while (std::getline(rs, cell, ',')) {
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw InvalidInputError("non-numeric cell '" + cell + "' in " + path);
      row.push_back(v);
    }
    if (row.size() != table.header.size())
      throw InvalidInputError("ragged csv row in " + path);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace wcvi
