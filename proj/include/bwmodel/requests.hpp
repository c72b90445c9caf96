#pragma once

// Front-end independent requests. The CLI and the HTTP service both build
// these and run them through the same functions, so identical inputs give
// identical numbers on every interface.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bwmodel/analysis.hpp"
#include "bwmodel/config.hpp"

namespace bwmodel {

inline constexpr std::size_t kMaxSweepPoints = 10000;

/// Workload knobs that live outside the config schema.
struct WorkloadAdjust {
  std::optional<Bytes> bytes_accessed;  ///< overrides percent_accessed

  bool operator==(const WorkloadAdjust&) const = default;
};

struct EvaluateRequest {
  std::string system;
  Mode mode = Mode::capacity;
  std::optional<Seconds> sla;
  std::optional<Watts> power_budget;
  CorePolicy core_policy = CorePolicy::full;
  ConfigDocument overrides;
  WorkloadAdjust adjust;
};

struct SweepRequest {
  SweepVariable variable = SweepVariable::sla;
  std::vector<double> values;
  std::vector<std::string> systems;
  std::optional<SweepMode> mode;
  std::optional<Seconds> sla;
  std::optional<Watts> power_budget;
  CorePolicy core_policy = CorePolicy::full;
  ConfigDocument overrides;
  WorkloadAdjust adjust;
};

struct CrossoverRequest {
  std::string a = "traditional";
  std::string b = "die-stacked";
  CrossoverMetric metric = CrossoverMetric::total_power;
  std::optional<double> accessed_percent;
  double density_factor = 1.0;
  double core_power_factor = 1.0;
  Seconds lo = Seconds(1e-3);
  Seconds hi = Seconds(10.0);
  ConfigDocument overrides;
  WorkloadAdjust adjust;
};

inline ModelContext resolve_with(const ConfigDocument& base, const ConfigDocument& overrides,
                                 const WorkloadAdjust& adjust) {
  auto ctx = resolve(merge(base, overrides));
  if (adjust.bytes_accessed) {
    ctx.workload.bytes_accessed = *adjust.bytes_accessed;
    ctx.percent_accessed = ctx.workload.percent_accessed();
    validate(ctx.workload);
  }
  return ctx;
}

inline ProvisioningResult run_evaluate(const ConfigDocument& base, const EvaluateRequest& req) {
  auto ctx = resolve_with(base, req.overrides, req.adjust);
  ProvisioningRequest p{req.mode, req.sla, req.power_budget, ctx.workload, req.core_policy};
  return provision(ctx.systems.find(req.system), ctx.shared, p);
}

inline SweepSpec to_spec(const SweepRequest& req) {
  SweepSpec spec;
  spec.variable = req.variable;
  spec.values = req.values;
  spec.systems = req.systems;
  spec.mode = req.mode.value_or(implied_mode(req.variable).value_or(SweepMode::capacity));
  spec.sla = req.sla;
  spec.power_budget = req.power_budget;
  spec.core_policy = req.core_policy;
  return spec;
}

inline std::vector<SweepRow> run_sweep(const ConfigDocument& base, const SweepRequest& req) {
  if (req.values.size() * std::max<std::size_t>(1, req.systems.size()) > kMaxSweepPoints) {
    throw InvalidInputError("sweep exceeds " + std::to_string(kMaxSweepPoints) + " points");
  }
  auto ctx = resolve_with(base, req.overrides, req.adjust);
  return run_sweep(to_spec(req), ctx.systems, ctx.shared, ctx.workload);
}

inline CrossoverResult run_crossover(const ConfigDocument& base, const CrossoverRequest& req) {
  auto ctx = resolve_with(base, req.overrides, req.adjust);
  auto work = ctx.workload;
  if (req.accessed_percent) {
    if (!(*req.accessed_percent > 0.0 && *req.accessed_percent <= 100.0)) {
      throw InvalidInputError("accessed percent must lie in (0, 100]");
    }
    work = WorkloadSpec::from_percent(work.db_size, *req.accessed_percent);
  }
  auto a = scale_density(ctx.systems.find(req.a), req.density_factor);
  auto b = scale_density(ctx.systems.find(req.b), req.density_factor);
  auto shared = scale_compute_power(ctx.shared, req.core_power_factor);
  return find_crossover(a, b, shared, work, req.metric, req.lo, req.hi);
}

// JSON request bodies. Overrides use the config document keys at top level.

namespace detail {

inline std::string json_string(const nlohmann::json& j, const char* key) {
  if (!j.at(key).is_string()) throw InvalidInputError(std::string(key) + " must be a string");
  return j.at(key).get<std::string>();
}

inline double json_value(const nlohmann::json& v, QuantityKind kind, const std::string& what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_quantity(v.get<std::string>(), kind);
  throw InvalidInputError(what + " must be a number or unit string");
}

inline WorkloadAdjust parse_adjust(const nlohmann::json& j) {
  WorkloadAdjust a;
  if (j.contains("bytes_accessed")) {
    a.bytes_accessed = Bytes(json_quantity(j["bytes_accessed"], QuantityKind::bytes, "bytes_accessed", false));
  }
  return a;
}

inline void require_object(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInputError("request body must be a JSON object");
}

}  // namespace detail

inline EvaluateRequest evaluate_request_from_json(const nlohmann::json& j) {
  detail::require_object(j);
  EvaluateRequest r;
  r.overrides = parse_config(j, {"system", "mode", "sla", "power_budget", "core_policy", "bytes_accessed"});
  if (!j.contains("system")) throw InvalidInputError("missing 'system'");
  r.system = detail::json_string(j, "system");
  r.mode = j.contains("mode") ? parse_mode(detail::json_string(j, "mode")) : Mode::capacity;
  if (j.contains("sla")) r.sla = Seconds(detail::json_quantity(j["sla"], QuantityKind::time, "sla", false));
  if (j.contains("power_budget"))
    r.power_budget = Watts(detail::json_quantity(j["power_budget"], QuantityKind::power, "power_budget", false));
  if (j.contains("core_policy")) r.core_policy = parse_core_policy(detail::json_string(j, "core_policy"));
  r.adjust = detail::parse_adjust(j);
  return r;
}

inline QuantityKind value_kind(SweepVariable v) {
  switch (v) {
    case SweepVariable::sla: return QuantityKind::time;
    case SweepVariable::power_budget: return QuantityKind::power;
    case SweepVariable::db_size: return QuantityKind::bytes;
    default: return QuantityKind::bytes;  // unitless variables only accept numbers
  }
}

inline bool has_unit(SweepVariable v) {
  return v == SweepVariable::sla || v == SweepVariable::power_budget || v == SweepVariable::db_size;
}

/// Parses one sweep value; bare numbers are base units (s, W, B, percent, fraction).
inline double parse_sweep_value(std::string_view text, SweepVariable v) {
  if (!has_unit(v)) {
    auto t = detail::trim(text);
    if (v == SweepVariable::percent_accessed && !t.empty() && t.back() == '%') t.remove_suffix(1);
    return parse_number(t);
  }
  return parse_quantity(text, value_kind(v), true);
}

inline SweepRequest sweep_request_from_json(const nlohmann::json& j) {
  detail::require_object(j);
  SweepRequest r;
  r.overrides = parse_config(j, {"variable", "values", "log_range", "names", "mode", "sla", "power_budget",
                                 "core_policy", "bytes_accessed"});
  if (!j.contains("variable")) throw InvalidInputError("missing 'variable'");
  r.variable = parse_sweep_variable(detail::json_string(j, "variable"));

  if (j.contains("values") == j.contains("log_range")) {
    throw InvalidInputError("give exactly one of 'values' or 'log_range'");
  }
  if (j.contains("values")) {
    if (!j["values"].is_array()) throw InvalidInputError("values must be an array");
    if (j["values"].size() > kMaxSweepPoints) throw InvalidInputError("sweep exceeds point limit");
    for (const auto& v : j["values"]) {
      if (v.is_number()) {
        r.values.push_back(v.get<double>());
      } else if (v.is_string()) {
        r.values.push_back(parse_sweep_value(v.get<std::string>(), r.variable));
      } else {
        throw InvalidInputError("sweep values must be numbers or unit strings");
      }
    }
  } else {
    const auto& lr = j["log_range"];
    detail::reject_unknown_keys(lr, {"start", "stop", "points"}, "log_range");
    auto kind = value_kind(r.variable);
    auto start = has_unit(r.variable) ? detail::json_value(lr.at("start"), kind, "log_range.start")
                                      : detail::json_number(lr.at("start"), "log_range.start");
    auto stop = has_unit(r.variable) ? detail::json_value(lr.at("stop"), kind, "log_range.stop")
                                     : detail::json_number(lr.at("stop"), "log_range.stop");
    auto points = detail::json_count(lr.at("points"), "log_range.points");
    if (points < 1 || static_cast<std::size_t>(points) > kMaxSweepPoints) {
      throw InvalidInputError("log_range.points must lie in [1, " + std::to_string(kMaxSweepPoints) + "]");
    }
    r.values = log_space(start, stop, static_cast<int>(points));
  }

  if (j.contains("names")) {
    if (!j["names"].is_array()) throw InvalidInputError("names must be an array of system names");
    for (const auto& n : j["names"]) {
      if (!n.is_string()) throw InvalidInputError("names must be an array of system names");
      r.systems.push_back(n.get<std::string>());
    }
  } else {
    r.systems = preset_names();
  }
  if (j.contains("mode")) r.mode = parse_sweep_mode(detail::json_string(j, "mode"));
  if (j.contains("sla")) r.sla = Seconds(detail::json_quantity(j["sla"], QuantityKind::time, "sla", false));
  if (j.contains("power_budget"))
    r.power_budget = Watts(detail::json_quantity(j["power_budget"], QuantityKind::power, "power_budget", false));
  if (j.contains("core_policy")) r.core_policy = parse_core_policy(detail::json_string(j, "core_policy"));
  r.adjust = detail::parse_adjust(j);
  return r;
}

inline CrossoverRequest crossover_request_from_json(const nlohmann::json& j) {
  detail::require_object(j);
  CrossoverRequest r;
  r.overrides = parse_config(j, {"a", "b", "metric", "accessed_percent", "density_factor", "core_power_factor",
                                 "range", "bytes_accessed"});
  if (j.contains("a")) r.a = detail::json_string(j, "a");
  if (j.contains("b")) r.b = detail::json_string(j, "b");
  if (j.contains("metric")) r.metric = parse_crossover_metric(detail::json_string(j, "metric"));
  if (j.contains("accessed_percent")) r.accessed_percent = detail::json_number(j["accessed_percent"], "accessed_percent");
  if (j.contains("density_factor")) r.density_factor = detail::json_number(j["density_factor"], "density_factor");
  if (j.contains("core_power_factor"))
    r.core_power_factor = detail::json_number(j["core_power_factor"], "core_power_factor");
  if (j.contains("range")) {
    const auto& rg = j["range"];
    detail::reject_unknown_keys(rg, {"lo", "hi"}, "range");
    if (rg.contains("lo")) r.lo = Seconds(detail::json_quantity(rg["lo"], QuantityKind::time, "range.lo", false));
    if (rg.contains("hi")) r.hi = Seconds(detail::json_quantity(rg["hi"], QuantityKind::time, "range.hi", false));
  }
  r.adjust = detail::parse_adjust(j);
  return r;
}

}  // namespace bwmodel
