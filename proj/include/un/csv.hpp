#pragma once

// Minimal CSV reading/writing (RFC-4180-style quoting on read; plain fields
// on write). Numeric cells are written with 6 significant digits.

#include <string>
#include <vector>

namespace un {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Throws SchemaError on unreadable files, ragged rows, or unbalanced quotes,
// citing the row number.
CsvTable read_csv(const std::string& path);

std::string format_cell(double v);  // "%.6g"

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace un
