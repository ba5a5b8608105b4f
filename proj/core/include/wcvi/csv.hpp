#pragma once

#include <string>
#include <vector>

// Minimal numeric CSV: header row plus double-valued cells, written with 17
// significant digits so write/read round trips are bit-exact.

namespace wcvi {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string format_g17(double v);

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace wcvi
