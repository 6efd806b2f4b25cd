#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace oblique {

/// One checked property. `worst_violation` is positive when the property is
/// violated; the row passes iff worst_violation <= tolerance.
struct PropertyRow {
  std::string check_name;
  std::size_t samples = 0;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  std::vector<std::pair<std::string, double>> fitted_constants;
  std::string note;

  double constant(const std::string& name) const;
};

struct PropertyReport {
  std::string name;
  std::vector<PropertyRow> rows;

  PropertyRow& add(std::string check_name, std::size_t samples, double worst_violation, double tolerance,
                   std::vector<std::pair<std::string, double>> constants = {}, std::string note = {});
  bool all_passed() const;
  const PropertyRow* find(const std::string& check_name) const;
  const PropertyRow& at(const std::string& check_name) const;
  void append(const PropertyReport& other, const std::string& prefix = {});

  nlohmann::ordered_json to_json() const;
};

nlohmann::ordered_json to_json(const PropertyRow& row);

}  // namespace oblique
