#include "mqnd/regression.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mqnd {

using nlohmann::json;

bool Tolerance::accepts(double value, double baseline) const {
  return std::abs(value - baseline) <= abs + rel * std::abs(baseline);
}

const Tolerance& RegressionTolerances::lookup(const std::string& path) const {
  const auto it = fields.find(path);
  return it == fields.end() ? fallback : it->second;
}

namespace {

void compare(const json& result, const json& base, const std::string& path,
             const RegressionTolerances& tol, RegressionReport& report) {
  const std::string where = path.empty() ? "<root>" : path;
  if (base.is_object()) {
    if (!result.is_object()) throw SchemaMismatchError(where + ": expected an object");
    for (const auto& [key, value] : base.items()) {
      if (path.empty() && key == "provenance") continue;
      if (!result.contains(key)) throw SchemaMismatchError("missing field " + path + (path.empty() ? "" : "/") + key);
      compare(result.at(key), value, path.empty() ? key : path + "/" + key, tol, report);
    }
    return;
  }
  if (base.is_array()) {
    if (!result.is_array() || result.size() != base.size()) {
      throw SchemaMismatchError(where + ": array length differs");
    }
    for (std::size_t i = 0; i < base.size(); ++i) {
      compare(result[i], base[i], path + "/" + std::to_string(i), tol, report);
    }
    return;
  }
  ++report.fields_checked;
  if (base.is_number()) {
    if (!result.is_number()) throw SchemaMismatchError(where + ": expected a number");
    const double a = result.get<double>();
    const double b = base.get<double>();
    const auto& t = tol.lookup(path);
    if (!t.accepts(a, b)) {
      std::ostringstream os;
      os << path << ": " << a << " vs baseline " << b << " (|diff| " << std::abs(a - b)
         << " > " << t.abs << " + " << t.rel << "*|baseline|)";
      report.violations.push_back(os.str());
    }
    return;
  }
  if (result.type() != base.type()) throw SchemaMismatchError(where + ": type differs");
  if (result != base) {
    report.violations.push_back(path + ": " + result.dump() + " vs baseline " + base.dump());
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

RegressionReport regression_compare_text(const std::string& result_json,
                                         const std::string& baseline_json,
                                         const RegressionTolerances& tol) {
  json result, base;
  try {
    result = json::parse(result_json);
    base = json::parse(baseline_json);
  } catch (const json::parse_error& e) {
    throw SchemaMismatchError(std::string("unparsable JSON: ") + e.what());
  }
  RegressionReport report;
  compare(result, base, "", tol, report);
  report.passed = report.violations.empty();
  return report;
}

RegressionReport regression_compare(const std::filesystem::path& result,
                                    const std::filesystem::path& baseline,
                                    const RegressionTolerances& tol) {
  return regression_compare_text(slurp(result), slurp(baseline), tol);
}

}  // namespace mqnd
