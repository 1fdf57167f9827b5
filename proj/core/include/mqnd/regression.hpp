#pragma once

// Field-by-field comparison of JSON result summaries against a baseline.

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mqnd {

class SchemaMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerance {
  double abs = 0.0;
  double rel = 0.0;
  /// |a - b| <= abs + rel * |b|
  bool accepts(double value, double baseline) const;
};

struct RegressionTolerances {
  Tolerance fallback{1e-9, 1e-9};
  /// Keyed by the slash-separated field path, e.g. "rows/0/delta_dark_count".
  std::map<std::string, Tolerance> fields;

  const Tolerance& lookup(const std::string& path) const;
};

struct RegressionReport {
  bool passed = true;
  std::size_t fields_checked = 0;
  std::vector<std::string> violations;  // one line per violating field
};

/// Compares every numeric, string and boolean leaf of the baseline with the
/// result. The "provenance" subtree is ignored. Missing fields or type changes
/// raise SchemaMismatchError.
RegressionReport regression_compare_text(const std::string& result_json,
                                         const std::string& baseline_json,
                                         const RegressionTolerances& tol);
RegressionReport regression_compare(const std::filesystem::path& result,
                                    const std::filesystem::path& baseline,
                                    const RegressionTolerances& tol);

}  // namespace mqnd
