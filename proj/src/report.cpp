#include "oblique/report.hpp"

#include <cmath>
#include <limits>

#include "oblique/errors.hpp"

namespace oblique {

namespace {

nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

double PropertyRow::constant(const std::string& name) const {
  for (const auto& [k, v] : fitted_constants) {
    if (k == name) return v;
  }
  throw ParameterError("property row '" + check_name + "' has no constant '" + name + "'");
}

PropertyRow& PropertyReport::add(std::string check_name, std::size_t samples, double worst_violation,
                                 double tolerance, std::vector<std::pair<std::string, double>> constants,
                                 std::string note) {
  PropertyRow row;
  row.check_name = std::move(check_name);
  row.samples = samples;
  row.worst_violation = worst_violation;
  row.tolerance = tolerance;
  row.passed = !std::isnan(worst_violation) && worst_violation <= tolerance;
  row.fitted_constants = std::move(constants);
  row.note = std::move(note);
  rows.push_back(std::move(row));
  return rows.back();
}

bool PropertyReport::all_passed() const {
  for (const auto& r : rows) {
    if (!r.passed) return false;
  }
  return true;
}

const PropertyRow* PropertyReport::find(const std::string& check_name) const {
  for (const auto& r : rows) {
    if (r.check_name == check_name) return &r;
  }
  return nullptr;
}

const PropertyRow& PropertyReport::at(const std::string& check_name) const {
  const PropertyRow* r = find(check_name);
  if (r == nullptr) throw ParameterError("report '" + name + "' has no row '" + check_name + "'");
  return *r;
}

void PropertyReport::append(const PropertyReport& other, const std::string& prefix) {
  for (auto r : other.rows) {
    r.check_name = prefix + r.check_name;
    rows.push_back(std::move(r));
  }
}

nlohmann::ordered_json to_json(const PropertyRow& row) {
  nlohmann::ordered_json j;
  j["check_name"] = row.check_name;
  j["samples"] = row.samples;
  j["worst_violation"] = number(row.worst_violation);
  j["tolerance"] = number(row.tolerance);
  j["passed"] = row.passed;
  nlohmann::ordered_json fc = nlohmann::ordered_json::object();
  for (const auto& [k, v] : row.fitted_constants) fc[k] = number(v);
  j["fitted_constants"] = fc;
  if (!row.note.empty()) j["note"] = row.note;
  return j;
}

nlohmann::ordered_json PropertyReport::to_json() const {
  nlohmann::ordered_json j;
  j["report"] = name;
  j["passed"] = all_passed();
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) j["rows"].push_back(oblique::to_json(r));
  return j;
}

}  // namespace oblique
