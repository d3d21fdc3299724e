#include "un/csv.hpp"

#include <cstdio>
#include <fstream>

#include "un/errors.hpp"

namespace un {

namespace {

// One CSV record, honoring quotes; returns false at end of input.
bool read_record(std::istream& in, std::vector<std::string>& fields,
                 std::size_t line_no) {
  fields.clear();
  int c = in.get();
  if (c == EOF) return false;
  std::string cell;
  bool quoted = false;
  for (;;) {
    if (quoted) {
      if (c == EOF)
        throw SchemaError("csv: unbalanced quote starting near line " +
                          std::to_string(line_no));
      if (c == '"') {
        const int nxt = in.get();
        if (nxt == '"') {
          cell.push_back('"');
        } else {
          quoted = false;
          c = nxt;
          continue;
        }
      } else {
        cell.push_back(static_cast<char>(c));
      }
    } else {
      if (c == '"' && cell.empty()) {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(cell));
        cell.clear();
      } else if (c == '\n' || c == EOF) {
        break;
      } else if (c == '\r') {
        // swallow; handles CRLF
      } else {
        cell.push_back(static_cast<char>(c));
      }
    }
    c = in.get();
  }
  fields.push_back(std::move(cell));
  return true;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("csv: cannot open \"" + path + "\"");
  CsvTable t;
  std::vector<std::string> fields;
  std::size_t line_no = 1;
  if (!read_record(in, t.header, line_no))
    throw SchemaError("csv: \"" + path + "\" is empty (no header)");
  while (true) {
    ++line_no;
    if (!read_record(in, fields, line_no)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != t.header.size())
      throw SchemaError("csv: row " + std::to_string(line_no) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(t.header.size()));
    t.rows.push_back(fields);
  }
  return t;
}

std::string format_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("csv: cannot write \"" + path + "\"");
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out << ',';
    out << header[j];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << row[j];
    }
    out << '\n';
  }
  if (!out) throw Error("csv: write failed for \"" + path + "\"");
}

}  // namespace un
