#pragma once

// Config documents: JSON overrides of the presets, shared constants and
// workload. Physical quantities are unit-suffixed strings.
//
//   {"systems": {"<name>": {"module_capacity": "32GB", "channel_bandwidth": "25.6GB",
//                           "memory_channels": 4, "channel_modules": 2,
//                           "module_power_w": 8, "blade_chips": 4}},
//    "shared": {"core_perf": "6GB", "core_power_w": 3, "max_chip_cores": 32,
//               "blade_overhead_w": 100},
//    "workload": {"db_size": "16TB", "percent_accessed": 20}}

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bwmodel/model.hpp"

namespace bwmodel {

struct SystemOverride {
  std::optional<Bytes> module_capacity;
  std::optional<BytesPerSecond> channel_bandwidth;
  std::optional<Count> memory_channels;
  std::optional<Count> channel_modules;
  std::optional<Watts> module_power;
  std::optional<Count> blade_chips;

  bool operator==(const SystemOverride&) const = default;
};

struct SharedOverride {
  std::optional<BytesPerSecond> core_perf;
  std::optional<Watts> core_power;
  std::optional<Count> max_chip_cores;
  std::optional<Watts> blade_overhead_power;

  bool operator==(const SharedOverride&) const = default;
};

struct WorkloadOverride {
  std::optional<Bytes> db_size;
  std::optional<double> percent_accessed;

  bool operator==(const WorkloadOverride&) const = default;
};

struct ConfigDocument {
  std::map<std::string, SystemOverride> systems;
  SharedOverride shared;
  WorkloadOverride workload;

  bool operator==(const ConfigDocument&) const = default;
};

/// Fully resolved inputs after merging overrides onto the presets.
struct ModelContext {
  SystemCatalog systems;
  SharedParams shared;
  WorkloadSpec workload;
  double percent_accessed = 20.0;

  bool operator==(const ModelContext&) const = default;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
  if (!obj.is_object()) throw InvalidInputError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw InvalidInputError("unknown key '" + key + "' in " + where);
  }
}

inline Count json_count(const json& v, const std::string& what) {
  if (v.is_number_integer()) return v.get<Count>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (std::floor(d) == d && std::fabs(d) < kMaxCount) return static_cast<Count>(d);
  }
  throw InvalidInputError(what + " must be an integer");
}

inline double json_quantity(const json& v, QuantityKind kind, const std::string& what,
                            bool numbers_allowed) {
  if (v.is_string()) {
    try {
      return parse_quantity(v.get<std::string>(), kind);
    } catch (const InvalidInputError& e) {
      throw InvalidInputError(what + ": " + e.what());
    }
  }
  if (numbers_allowed && v.is_number()) return v.get<double>();
  throw InvalidInputError(what + (numbers_allowed ? " must be a number or unit string"
                                                  : " must be a unit-suffixed string"));
}

inline double json_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw InvalidInputError(what + " must be a number");
  return v.get<double>();
}

}  // namespace detail

inline SystemOverride parse_system_override(const nlohmann::json& j, const std::string& name) {
  const std::string where = "systems." + name;
  detail::reject_unknown_keys(j, {"module_capacity", "channel_bandwidth", "memory_channels",
                                  "channel_modules", "module_power_w", "blade_chips"},
                              where);
  SystemOverride o;
  if (j.contains("module_capacity"))
    o.module_capacity = Bytes(detail::json_quantity(j["module_capacity"], QuantityKind::bytes,
                                                    where + ".module_capacity", false));
  if (j.contains("channel_bandwidth"))
    o.channel_bandwidth = BytesPerSecond(detail::json_quantity(
        j["channel_bandwidth"], QuantityKind::bandwidth, where + ".channel_bandwidth", false));
  if (j.contains("memory_channels"))
    o.memory_channels = detail::json_count(j["memory_channels"], where + ".memory_channels");
  if (j.contains("channel_modules"))
    o.channel_modules = detail::json_count(j["channel_modules"], where + ".channel_modules");
  if (j.contains("module_power_w"))
    o.module_power = Watts(detail::json_quantity(j["module_power_w"], QuantityKind::power,
                                                 where + ".module_power_w", true));
  if (j.contains("blade_chips")) o.blade_chips = detail::json_count(j["blade_chips"], where + ".blade_chips");
  return o;
}

inline SharedOverride parse_shared_override(const nlohmann::json& j) {
  detail::reject_unknown_keys(j, {"core_perf", "core_power_w", "max_chip_cores", "blade_overhead_w"},
                              "shared");
  SharedOverride o;
  if (j.contains("core_perf"))
    o.core_perf = BytesPerSecond(
        detail::json_quantity(j["core_perf"], QuantityKind::bandwidth, "shared.core_perf", false));
  if (j.contains("core_power_w"))
    o.core_power = Watts(detail::json_quantity(j["core_power_w"], QuantityKind::power, "shared.core_power_w", true));
  if (j.contains("max_chip_cores")) o.max_chip_cores = detail::json_count(j["max_chip_cores"], "shared.max_chip_cores");
  if (j.contains("blade_overhead_w"))
    o.blade_overhead_power =
        Watts(detail::json_quantity(j["blade_overhead_w"], QuantityKind::power, "shared.blade_overhead_w", true));
  return o;
}

inline WorkloadOverride parse_workload_override(const nlohmann::json& j) {
  detail::reject_unknown_keys(j, {"db_size", "percent_accessed"}, "workload");
  WorkloadOverride o;
  if (j.contains("db_size"))
    o.db_size = Bytes(detail::json_quantity(j["db_size"], QuantityKind::bytes, "workload.db_size", false));
  if (j.contains("percent_accessed"))
    o.percent_accessed = detail::json_number(j["percent_accessed"], "workload.percent_accessed");
  return o;
}

/// Parses the `systems`, `shared` and `workload` sections of `j`; any other
/// top-level key not listed in `extra_keys` is rejected.
inline ConfigDocument parse_config(const nlohmann::json& j, const std::set<std::string>& extra_keys = {}) {
  std::set<std::string> allowed{"systems", "shared", "workload"};
  allowed.insert(extra_keys.begin(), extra_keys.end());
  detail::reject_unknown_keys(j, allowed, "config document");
  ConfigDocument doc;
  if (j.contains("systems")) {
    if (!j["systems"].is_object()) throw InvalidInputError("systems must be a JSON object");
    for (const auto& [name, body] : j["systems"].items()) {
      if (name.empty()) throw InvalidInputError("system names must be non-empty");
      doc.systems[name] = parse_system_override(body, name);
    }
  }
  if (j.contains("shared")) doc.shared = parse_shared_override(j["shared"]);
  if (j.contains("workload")) doc.workload = parse_workload_override(j["workload"]);
  return doc;
}

inline nlohmann::json to_json(const ConfigDocument& doc) {
  nlohmann::json j = nlohmann::json::object();
  if (!doc.systems.empty()) {
    j["systems"] = nlohmann::json::object();
    for (const auto& [name, o] : doc.systems) {
      auto& s = j["systems"][name];
      s = nlohmann::json::object();
      if (o.module_capacity) s["module_capacity"] = format_bytes(*o.module_capacity);
      if (o.channel_bandwidth) s["channel_bandwidth"] = format_bytes(Bytes(o.channel_bandwidth->value()));
      if (o.memory_channels) s["memory_channels"] = *o.memory_channels;
      if (o.channel_modules) s["channel_modules"] = *o.channel_modules;
      if (o.module_power) s["module_power_w"] = o.module_power->value();
      if (o.blade_chips) s["blade_chips"] = *o.blade_chips;
    }
  }
  nlohmann::json sh = nlohmann::json::object();
  if (doc.shared.core_perf) sh["core_perf"] = format_bytes(Bytes(doc.shared.core_perf->value()));
  if (doc.shared.core_power) sh["core_power_w"] = doc.shared.core_power->value();
  if (doc.shared.max_chip_cores) sh["max_chip_cores"] = *doc.shared.max_chip_cores;
  if (doc.shared.blade_overhead_power) sh["blade_overhead_w"] = doc.shared.blade_overhead_power->value();
  if (!sh.empty()) j["shared"] = sh;
  nlohmann::json wl = nlohmann::json::object();
  if (doc.workload.db_size) wl["db_size"] = format_bytes(*doc.workload.db_size);
  if (doc.workload.percent_accessed) wl["percent_accessed"] = *doc.workload.percent_accessed;
  if (!wl.empty()) j["workload"] = wl;
  return j;
}

/// Layers `top` over `base`; fields set in `top` win.
inline ConfigDocument merge(ConfigDocument base, const ConfigDocument& top) {
  auto take = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  for (const auto& [name, o] : top.systems) {
    auto& d = base.systems[name];
    take(d.module_capacity, o.module_capacity);
    take(d.channel_bandwidth, o.channel_bandwidth);
    take(d.memory_channels, o.memory_channels);
    take(d.channel_modules, o.channel_modules);
    take(d.module_power, o.module_power);
    take(d.blade_chips, o.blade_chips);
  }
  take(base.shared.core_perf, top.shared.core_perf);
  take(base.shared.core_power, top.shared.core_power);
  take(base.shared.max_chip_cores, top.shared.max_chip_cores);
  take(base.shared.blade_overhead_power, top.shared.blade_overhead_power);
  take(base.workload.db_size, top.workload.db_size);
  take(base.workload.percent_accessed, top.workload.percent_accessed);
  return base;
}

/// Applies a document to the presets and validates the result. Systems not
/// named by a preset must set every field.
inline ModelContext resolve(const ConfigDocument& doc) {
  ModelContext ctx;
  ctx.systems = SystemCatalog::presets();
  ctx.shared = default_shared();

  for (const auto& [name, o] : doc.systems) {
    SystemConfig cfg;
    if (const auto* p = ctx.systems.try_find(name)) {
      cfg = *p;
    } else {
      if (!(o.module_capacity && o.channel_bandwidth && o.memory_channels && o.channel_modules &&
            o.module_power && o.blade_chips)) {
        throw InvalidInputError("system '" + name + "' is not a preset and must define every field");
      }
      cfg.name = name;
    }
    if (o.module_capacity) cfg.module_capacity = *o.module_capacity;
    if (o.channel_bandwidth) cfg.channel_bandwidth = *o.channel_bandwidth;
    if (o.memory_channels) cfg.memory_channels = *o.memory_channels;
    if (o.channel_modules) cfg.channel_modules = *o.channel_modules;
    if (o.module_power) cfg.module_power = *o.module_power;
    if (o.blade_chips) cfg.blade_chips = *o.blade_chips;
    validate(cfg);
    ctx.systems.upsert(cfg);
  }

  const auto& s = doc.shared;
  if (s.core_perf) ctx.shared.core_perf = *s.core_perf;
  if (s.core_power) ctx.shared.core_power = *s.core_power;
  if (s.max_chip_cores) ctx.shared.max_chip_cores = *s.max_chip_cores;
  if (s.blade_overhead_power) ctx.shared.blade_overhead_power = *s.blade_overhead_power;
  validate(ctx.shared);

  Bytes db = doc.workload.db_size.value_or(default_workload().db_size);
  ctx.percent_accessed = doc.workload.percent_accessed.value_or(20.0);
  if (!(ctx.percent_accessed > 0.0 && ctx.percent_accessed <= 100.0)) {
    throw InvalidInputError("percent_accessed must lie in (0, 100]");
  }
  ctx.workload = WorkloadSpec::from_percent(db, ctx.percent_accessed);
  validate(ctx.workload);
  return ctx;
}

/// A document that pins every value of `ctx` explicitly.
inline ConfigDocument document_from(const ModelContext& ctx) {
  ConfigDocument doc;
  for (const auto& cfg : ctx.systems.systems()) {
    doc.systems[cfg.name] = SystemOverride{cfg.module_capacity, cfg.channel_bandwidth, cfg.memory_channels,
                                           cfg.channel_modules, cfg.module_power, cfg.blade_chips};
  }
  doc.shared = SharedOverride{ctx.shared.core_perf, ctx.shared.core_power, ctx.shared.max_chip_cores,
                              ctx.shared.blade_overhead_power};
  doc.workload = WorkloadOverride{ctx.workload.db_size, ctx.percent_accessed};
  return doc;
}

inline ConfigDocument load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInputError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

inline void save_config(const std::string& path, const ConfigDocument& doc) {
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot write config file '" + path + "'");
  out << to_json(doc).dump(2) << "\n";
}

}  // namespace bwmodel
