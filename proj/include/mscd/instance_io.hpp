#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mscd/errors.hpp"
#include "mscd/instance.hpp"

namespace mscd {

enum class InstanceFormat { kJson, kCourierCsv };

inline InstanceFormat parse_instance_format(const std::string& name) {
  if (name == "json" || name == "canonical-json") return InstanceFormat::kJson;
  if (name == "csv" || name == "courier-csv") return InstanceFormat::kCourierCsv;
  throw InvalidParam("unknown instance format: " + name);
}

inline nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["depots"] = nlohmann::json::array();
  for (const Depot& d : inst.depots) {
    j["depots"].push_back(
        {{"id", d.id}, {"x", d.location.x}, {"y", d.location.y}, {"speed", d.speed}});
  }
  j["requests"] = nlohmann::json::array();
  for (const Request& r : inst.requests) {
    j["requests"].push_back({{"id", r.id},
                             {"sx", r.source.x},
                             {"sy", r.source.y},
                             {"tx", r.target.x},
                             {"ty", r.target.y}});
  }
  j["meta"] = inst.meta;
  return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
  Instance inst;
  try {
    if (!j.is_object()) throw ParseError("instance: top level must be an object");
    if (!j.contains("depots") || !j.at("depots").is_array())
      throw ParseError("instance: missing depots array");
    for (const auto& d : j.at("depots")) {
      inst.depots.push_back({d.at("id").get<int>(),
                             {d.at("x").get<double>(), d.at("y").get<double>()},
                             d.at("speed").get<double>()});
    }
    if (j.contains("requests")) {
      for (const auto& r : j.at("requests")) {
        inst.requests.push_back({r.at("id").get<int>(),
                                 {r.at("sx").get<double>(), r.at("sy").get<double>()},
                                 {r.at("tx").get<double>(), r.at("ty").get<double>()}});
      }
    }
    if (j.contains("meta")) inst.meta = j.at("meta");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("instance: ") + e.what());
  }
  normalize(inst);
  return inst;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParam("cannot write " + path.string());
  out << text;
}

inline nlohmann::json parse_json_text(const std::string& text, const std::string& what) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Courier CSV: depots.csv (id,lat,lng,speed) and orders.csv
// (id,pickup_lat,pickup_lng,dropoff_lat,dropoff_lng). Columns are located by
// header name; latitude maps to y and longitude to x.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  std::string out = s.substr(b, e - b + 1);
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;

  int column(const std::string& name, const std::string& file) const {
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
      if (header[c] == name) return c;
    }
    throw ParseError(file + ": missing column '" + name + "'");
  }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) throw ParseError(path.string() + ": empty file");
  return table;
}

template <typename T>
T parse_field(const std::string& text, const std::string& where) {
  std::istringstream in(text);
  T value{};
  in >> value;
  if (in.fail() || !in.eof()) throw ParseError(where + ": cannot parse '" + text + "'");
  return value;
}

}  // namespace detail

inline Instance load_courier_csv(const std::filesystem::path& dir) {
  using detail::parse_field;
  Instance inst;
  const auto depots_path = dir / "depots.csv";
  const auto orders_path = dir / "orders.csv";
  const detail::CsvTable depots = detail::read_csv(depots_path);
  const int c_id = depots.column("id", depots_path.string());
  const int c_lat = depots.column("lat", depots_path.string());
  const int c_lng = depots.column("lng", depots_path.string());
  const int c_speed = depots.column("speed", depots_path.string());
  for (std::size_t r = 0; r < depots.rows.size(); ++r) {
    const auto& row = depots.rows[r];
    const std::string where = depots_path.string() + ":" + std::to_string(depots.line_numbers[r]);
    inst.depots.push_back({parse_field<int>(row[c_id], where),
                           {parse_field<double>(row[c_lng], where),
                            parse_field<double>(row[c_lat], where)},
                           parse_field<double>(row[c_speed], where)});
  }
  const detail::CsvTable orders = detail::read_csv(orders_path);
  const int o_id = orders.column("id", orders_path.string());
  const int o_plat = orders.column("pickup_lat", orders_path.string());
  const int o_plng = orders.column("pickup_lng", orders_path.string());
  const int o_dlat = orders.column("dropoff_lat", orders_path.string());
  const int o_dlng = orders.column("dropoff_lng", orders_path.string());
  for (std::size_t r = 0; r < orders.rows.size(); ++r) {
    const auto& row = orders.rows[r];
    const std::string where = orders_path.string() + ":" + std::to_string(orders.line_numbers[r]);
    inst.requests.push_back({parse_field<int>(row[o_id], where),
                             {parse_field<double>(row[o_plng], where),
                              parse_field<double>(row[o_plat], where)},
                             {parse_field<double>(row[o_dlng], where),
                              parse_field<double>(row[o_dlat], where)}});
  }
  inst.meta = {{"generator", "courier-csv"}, {"source", dir.string()}};
  normalize(inst);
  return inst;
}

inline Instance load_instance(const std::filesystem::path& path,
                              InstanceFormat format = InstanceFormat::kJson) {
  if (format == InstanceFormat::kCourierCsv) return load_courier_csv(path);
  return instance_from_json(parse_json_text(read_text_file(path), path.string()));
}

inline void save_instance(const Instance& inst, const std::filesystem::path& path) {
  write_text_file(path, instance_to_json(inst).dump(1) + "\n");
}

}  // namespace mscd
