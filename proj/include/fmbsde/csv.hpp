#pragma once

#include <string>
#include <vector>

namespace fmbsde {

/// Rectangular numeric table with a mandatory header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Writes the table RFC-4180 style: '.' decimal separator, 17 significant
/// digits, LF line endings.
void write_csv(const CsvTable& table, const std::string& path);

/// Reads back a table written by write_csv (numeric cells only).
CsvTable read_csv(const std::string& path);

}  // namespace fmbsde
