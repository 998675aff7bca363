#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hps/condensation.hpp"
#include "hps/geometry.hpp"

namespace hps {

inline constexpr int kSchemaVersion = 1;

// Numeric table; NaN cells are written as empty fields.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
};

std::string format_double(double v);  // shortest round-trip form
void write_csv(const std::string& path, const Table& t);
Table read_csv(const std::string& path);

void write_json(const std::string& path, const nlohmann::ordered_json& j);
nlohmann::ordered_json read_json(const std::string& path);

// x_1..x_d, u for every node.
Table node_table(const Discretization& disc, std::span<const double> u);

nlohmann::ordered_json to_json(const PhaseTimes& t);
nlohmann::ordered_json mesh_summary(const Discretization& disc, std::size_t interface_size);

}  // namespace hps
