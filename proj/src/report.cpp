#include <cmath>
#include <fstream>
#include <sstream>

#include "inclab/errors.hpp"
#include "inclab/experiments.hpp"

namespace inclab {

namespace {

nlohmann::json finite_or_string(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::string csv_cell(const nlohmann::json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return v.dump();
}

}  // namespace

Verdict within(std::string name, std::string criterion, double value, double target, double tolerance) {
  Verdict v;
  v.name = std::move(name);
  v.criterion = std::move(criterion);
  v.value = value;
  v.target = target;
  v.tolerance = tolerance;
  v.pass = std::abs(value - target) <= tolerance;
  return v;
}

Verdict at_most(std::string name, std::string criterion, double value, double bound) {
  Verdict v;
  v.name = std::move(name);
  v.criterion = std::move(criterion);
  v.value = value;
  v.target = bound;
  v.pass = value <= bound;
  v.detail = "value <= target";
  return v;
}

bool Report::passed() const {
  for (const auto& v : verdicts) {
    if (v.hard && !v.pass) return false;
  }
  return true;
}

nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j{{"name", v.name},
                   {"criterion", v.criterion},
                   {"value", finite_or_string(v.value)},
                   {"target", finite_or_string(v.target)},
                   {"tolerance", finite_or_string(v.tolerance)},
                   {"pass", v.pass},
                   {"hard", v.hard}};
  if (!v.detail.empty()) j["detail"] = v.detail;
  return j;
}

nlohmann::json to_json(const Report& r) {
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(to_json(v));
  nlohmann::json j{{"experiment", r.experiment},
                   {"config", r.config},
                   {"seed", r.seed},
                   {"statistics", r.statistics},
                   {"verdicts", verdicts},
                   {"passed", r.passed()}};
  if (!r.banner.empty()) j["banner"] = r.banner;
  return j;
}

std::string to_csv(const Report& r) {
  std::ostringstream out;
  for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? "," : "") << r.columns[i];
  out << '\n';
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
  return out.str();
}

void write_report(const Report& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto json_path = dir / (r.experiment + ".json");
  std::ofstream js(json_path);
  if (!js) throw DomainError("cannot write " + json_path.string());
  js << to_json(r).dump(2) << '\n';
  const auto csv_path = dir / (r.experiment + ".csv");
  std::ofstream csv(csv_path);
  if (!csv) throw DomainError("cannot write " + csv_path.string());
  csv << to_csv(r);
}

}  // namespace inclab
