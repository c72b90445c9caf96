#pragma once

// Serialization of model results: CSV rows, JSON documents and human tables.
// CSV and JSON carry full precision; tables round to three digits.

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bwmodel/analysis.hpp"

namespace bwmodel {

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "system",         "variable",        "value",        "response_time_s", "total_power_w",
      "mem_power_w",    "compute_power_w", "overhead_power_w", "capacity_bytes", "overprovision",
      "energy_j",       "blades",          "chips",        "modules",         "active_cores",
      "feasible"};
  return cols;
}

inline std::string csv_header() {
  std::string h;
  for (const auto& c : csv_columns()) h += (h.empty() ? "" : ",") + c;
  return h;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

/// Infeasible rows leave every measured column empty.
inline std::string csv_row(const SweepRow& row) {
  std::vector<std::string> f{detail::csv_field(row.system), std::string(to_string(row.variable)),
                             format_number(row.value)};
  if (row.feasible) {
    const auto& m = row.metrics;
    const auto& d = row.design;
    for (double v : {m.response_time.value(), m.total_power.value(), m.mem_power.value(),
                     m.compute_power.value(), m.overhead_power.value(), m.total_capacity.value(),
                     m.overprovision_factor, m.energy_per_query.value()}) {
      f.push_back(format_number(v));
    }
    for (Count c : {d.blades, d.compute_chips, d.mem_modules, d.active_cores_per_chip}) {
      f.push_back(std::to_string(c));
    }
    f.emplace_back("true");
  } else {
    f.resize(csv_columns().size() - 1);
    f.emplace_back("false");
  }
  std::string line;
  for (std::size_t i = 0; i < f.size(); ++i) line += (i ? "," : "") + f[i];
  return line;
}

inline void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << csv_header() << "\n";
  for (const auto& r : rows) out << csv_row(r) << "\n";
}

/// Sweep rows as JSON objects keyed by the CSV column names, numbers raw.
inline nlohmann::json sweep_row_json(const SweepRow& row) {
  nlohmann::json j;
  j["system"] = row.system;
  j["variable"] = std::string(to_string(row.variable));
  j["value"] = row.value;
  j["feasible"] = row.feasible;
  const char* measured[] = {"response_time_s", "total_power_w", "mem_power_w", "compute_power_w",
                            "overhead_power_w", "capacity_bytes", "overprovision", "energy_j",
                            "blades", "chips", "modules", "active_cores"};
  if (!row.feasible) {
    for (const char* k : measured) j[k] = nullptr;
    j["reason"] = row.reason;
    return j;
  }
  const auto& m = row.metrics;
  const auto& d = row.design;
  j["response_time_s"] = m.response_time.value();
  j["total_power_w"] = m.total_power.value();
  j["mem_power_w"] = m.mem_power.value();
  j["compute_power_w"] = m.compute_power.value();
  j["overhead_power_w"] = m.overhead_power.value();
  j["capacity_bytes"] = m.total_capacity.value();
  j["overprovision"] = m.overprovision_factor;
  j["energy_j"] = m.energy_per_query.value();
  j["blades"] = d.blades;
  j["chips"] = d.compute_chips;
  j["modules"] = d.mem_modules;
  j["active_cores"] = d.active_cores_per_chip;
  return j;
}

inline nlohmann::json to_json(const SystemConfig& cfg) {
  return {{"name", cfg.name},
          {"module_capacity", format_bytes(cfg.module_capacity)},
          {"channel_bandwidth", format_bytes(Bytes(cfg.channel_bandwidth.value()))},
          {"memory_channels", cfg.memory_channels},
          {"channel_modules", cfg.channel_modules},
          {"module_power_w", cfg.module_power.value()},
          {"blade_chips", cfg.blade_chips}};
}

inline nlohmann::json to_json(const SharedParams& s) {
  return {{"core_perf", format_bytes(Bytes(s.core_perf.value()))},
          {"core_power_w", s.core_power.value()},
          {"max_chip_cores", s.max_chip_cores},
          {"blade_overhead_w", s.blade_overhead_power.value()}};
}

inline nlohmann::json to_json(const ClusterDesign& d) {
  return {{"mem_modules", d.mem_modules},
          {"compute_chips", d.compute_chips},
          {"active_cores_per_chip", d.active_cores_per_chip},
          {"blades", d.blades}};
}

inline nlohmann::json to_json(const ClusterMetrics& m) {
  return {{"chip_bandwidth", format_bandwidth(m.chip_bandwidth)},
          {"chip_perf", format_bandwidth(m.chip_perf)},
          {"aggregate_perf", format_bandwidth(m.aggregate_perf)},
          {"aggregate_bandwidth", format_bandwidth(m.aggregate_bandwidth)},
          {"response_time", format_time(m.response_time)},
          {"mem_power", format_power(m.mem_power)},
          {"compute_power", format_power(m.compute_power)},
          {"overhead_power", format_power(m.overhead_power)},
          {"total_power", format_power(m.total_power)},
          {"total_capacity", format_bytes(m.total_capacity)},
          {"overprovision_factor", m.overprovision_factor},
          {"energy_per_query", format_energy(m.energy_per_query)}};
}

/// Inverse of to_json(ClusterMetrics).
inline ClusterMetrics metrics_from_json(const nlohmann::json& j) {
  ClusterMetrics m;
  m.chip_bandwidth = parse_bandwidth(j.at("chip_bandwidth").get<std::string>());
  m.chip_perf = parse_bandwidth(j.at("chip_perf").get<std::string>());
  m.aggregate_perf = parse_bandwidth(j.at("aggregate_perf").get<std::string>());
  m.aggregate_bandwidth = parse_bandwidth(j.at("aggregate_bandwidth").get<std::string>());
  m.response_time = parse_time(j.at("response_time").get<std::string>());
  m.mem_power = parse_power(j.at("mem_power").get<std::string>());
  m.compute_power = parse_power(j.at("compute_power").get<std::string>());
  m.overhead_power = parse_power(j.at("overhead_power").get<std::string>());
  m.total_power = parse_power(j.at("total_power").get<std::string>());
  m.total_capacity = parse_bytes(j.at("total_capacity").get<std::string>());
  m.overprovision_factor = j.at("overprovision_factor").get<double>();
  m.energy_per_query = parse_energy(j.at("energy_per_query").get<std::string>());
  return m;
}

inline ClusterDesign design_from_json(const nlohmann::json& j) {
  return ClusterDesign{j.at("mem_modules").get<Count>(), j.at("compute_chips").get<Count>(),
                       j.at("active_cores_per_chip").get<Count>(), j.at("blades").get<Count>()};
}

inline nlohmann::json to_json(const ProvisioningResult& r, const std::string& system, Mode mode) {
  return {{"system", system},
          {"mode", std::string(to_string(mode))},
          {"binding_constraint", std::string(to_string(r.binding_constraint))},
          {"design", to_json(r.design)},
          {"metrics", to_json(r.metrics)}};
}

inline nlohmann::json to_json(const CrossoverResult& r, const std::string& a, const std::string& b) {
  return {{"a", a},
          {"b", b},
          {"variable", r.variable},
          {"metric", std::string(to_string(r.metric))},
          {"crossover_value", format_time(r.crossover_value)},
          {"bracket", {{"lo", format_time(r.bracket_lo)}, {"hi", format_time(r.bracket_hi)}}},
          {"a_below_at_lo", r.a_below_at_lo},
          {"a_below_at_hi", r.a_below_at_hi}};
}

/// Two-column human report of one provisioning result.
inline void write_table(std::ostream& out, const ProvisioningResult& r, const std::string& system, Mode mode) {
  const auto& d = r.design;
  const auto& m = r.metrics;
  auto pct = [&](Watts part) {
    std::ostringstream s;
    s << std::setprecision(3) << 100.0 * (part / m.total_power) << "%";
    return s.str();
  };
  std::vector<std::pair<std::string, std::string>> lines{
      {"system", system},
      {"mode", std::string(to_string(mode))},
      {"binding constraint", std::string(to_string(r.binding_constraint))},
      {"memory modules", std::to_string(d.mem_modules)},
      {"compute chips", std::to_string(d.compute_chips)},
      {"active cores/chip", std::to_string(d.active_cores_per_chip)},
      {"blades", std::to_string(d.blades)},
      {"response time", humanize(m.response_time.value(), QuantityKind::time)},
      {"aggregate perf", humanize(m.aggregate_perf.value(), QuantityKind::bandwidth)},
      {"total power", humanize(m.total_power.value(), QuantityKind::power)},
      {"  memory", humanize(m.mem_power.value(), QuantityKind::power) + " (" + pct(m.mem_power) + ")"},
      {"  compute", humanize(m.compute_power.value(), QuantityKind::power) + " (" + pct(m.compute_power) + ")"},
      {"  overhead", humanize(m.overhead_power.value(), QuantityKind::power) + " (" + pct(m.overhead_power) + ")"},
      {"capacity", humanize(m.total_capacity.value(), QuantityKind::bytes)},
      {"over-provisioning", [&] {
         std::ostringstream s;
         s << std::setprecision(3) << m.overprovision_factor << "x";
         return s.str();
       }()},
      {"energy/query", humanize(m.energy_per_query.value(), QuantityKind::energy)},
  };
  for (const auto& [k, v] : lines) out << std::left << std::setw(20) << k << v << "\n";
}

}  // namespace bwmodel
