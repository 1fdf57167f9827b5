#include "mqnd/csv.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mqnd {

void write_provenance(std::ostream& os, const Provenance& p) {
  os << "# config_hash=" << p.config_hash << " tool_version=" << p.tool_version
     << " seed=" << p.seed << '\n';
}

void write_csv(std::ostream& os, const Provenance& p, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  write_provenance(os, p);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n' << std::setprecision(12);
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw std::invalid_argument("write_csv: row width mismatch");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("csv: no column '" + name + "'");
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ss, cell, ',')) t.header.push_back(cell);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != t.header.size()) throw std::runtime_error("read_csv: ragged row");
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error("read_csv: no header row");
  return t;
}

}  // namespace mqnd
