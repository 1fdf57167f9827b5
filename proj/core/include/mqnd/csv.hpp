#pragma once

// Result files: CSV tables and JSON summaries, each carrying a provenance
// header so that a file can be traced back to the run that wrote it.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mqnd {

struct Provenance {
  std::string config_hash;
  std::string tool_version;
  std::uint64_t seed = 0;
};

/// "# config_hash=... tool_version=... seed=..." followed by a newline.
void write_provenance(std::ostream& os, const Provenance& p);

/// Comment-prefixed provenance, one header row, then numeric rows at 12
/// significant digits. Rows must match the header width.
void write_csv(std::ostream& os, const Provenance& p, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws if absent
};

/// Reads a file written by write_csv ('#' lines skipped).
CsvTable read_csv(std::istream& is);

}  // namespace mqnd
