#include "hps/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hps/errors.hpp"

namespace hps {

std::size_t Table::column(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k] == name) return k;
  throw ConfigError("table has no column '" + name + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const Table& t) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  for (std::size_t k = 0; k < t.columns.size(); ++k) out << (k ? "," : "") << t.columns[k];
  out << '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw ConfigError("table row width mismatch");
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_double(row[k]);
    out << '\n';
  }
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": missing header");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t end = line.find(',', start);
      const std::string cell = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
      double v = std::nan("");
      if (!cell.empty()) {
        auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
          throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      row.push_back(v);
      if (end == std::string::npos) break;
      start = end + 1;
    }
    if (row.size() != t.columns.size())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.columns.size()) + " fields");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

nlohmann::ordered_json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Table node_table(const Discretization& disc, std::span<const double> u) {
  Table t;
  for (std::size_t k = 0; k < disc.dim(); ++k) t.columns.push_back("x" + std::to_string(k + 1));
  t.columns.push_back("u");
  t.rows.reserve(disc.node_count());
  for (std::size_t i = 0; i < disc.node_count(); ++i) {
    std::vector<double> row(disc.node(i), disc.node(i) + disc.dim());
    row.push_back(u[i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

nlohmann::ordered_json to_json(const PhaseTimes& t) {
  return {{"dtn_assembly", t.dtn_assembly},       {"t_assembly", t.t_assembly},
          {"factorize", t.factorize},             {"load_reduction", t.load_reduction},
          {"interface_solve", t.interface_solve}, {"interior_solve", t.interior_solve}};
}

nlohmann::ordered_json mesh_summary(const Discretization& disc, std::size_t interface_size) {
  return {{"dim", disc.dim()},
          {"boxes", disc.mesh.boxes_per_dim},
          {"p", disc.p()},
          {"corner_mode", to_string(disc.mesh.corner_mode)},
          {"domain_lo", disc.domain.lo},
          {"domain_hi", disc.domain.hi},
          {"leaves", disc.leaves.size()},
          {"nodes", disc.node_count()},
          {"interface_dofs", interface_size}};
}

}  // namespace hps
