#pragma once

// Sweeps, crossover search and sensitivity studies over the provisioning
// solvers.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bwmodel/provisioning.hpp"

namespace bwmodel {

enum class SweepVariable { sla, power_budget, db_size, percent_accessed, fraction_read };
enum class SweepMode { performance, power, capacity, memory_wall };

inline std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::sla: return "sla";
    case SweepVariable::power_budget: return "power_budget";
    case SweepVariable::db_size: return "db_size";
    case SweepVariable::percent_accessed: return "percent_accessed";
    case SweepVariable::fraction_read: return "fraction_read";
  }
  return "?";
}

inline std::string_view to_string(SweepMode m) {
  switch (m) {
    case SweepMode::performance: return "performance";
    case SweepMode::power: return "power";
    case SweepMode::capacity: return "capacity";
    case SweepMode::memory_wall: return "memory-wall";
  }
  return "?";
}

/// Accepts both the canonical names and the CLI spellings.
inline SweepVariable parse_sweep_variable(std::string_view s) {
  if (s == "sla") return SweepVariable::sla;
  if (s == "power_budget" || s == "budget") return SweepVariable::power_budget;
  if (s == "db_size" || s == "db-size") return SweepVariable::db_size;
  if (s == "percent_accessed" || s == "accessed") return SweepVariable::percent_accessed;
  if (s == "fraction_read" || s == "fraction") return SweepVariable::fraction_read;
  throw InvalidInputError("unknown sweep variable '" + std::string(s) +
                          "' (valid: sla, budget, db-size, accessed, fraction)");
}

inline SweepMode parse_sweep_mode(std::string_view s) {
  if (s == "memory-wall" || s == "memory_wall") return SweepMode::memory_wall;
  switch (parse_mode(s)) {
    case Mode::performance: return SweepMode::performance;
    case Mode::power: return SweepMode::power;
    case Mode::capacity: return SweepMode::capacity;
  }
  return SweepMode::capacity;
}

/// Mode implied by a variable, if it implies one.
inline std::optional<SweepMode> implied_mode(SweepVariable v) {
  switch (v) {
    case SweepVariable::sla: return SweepMode::performance;
    case SweepVariable::power_budget: return SweepMode::power;
    case SweepVariable::fraction_read: return SweepMode::memory_wall;
    default: return std::nullopt;
  }
}

/// `points` values from start to stop inclusive, evenly spaced in log space.
inline std::vector<double> log_space(double start, double stop, int points) {
  if (!(start > 0.0) || !(stop > start) || points < 2) {
    if (points == 1 && start > 0.0) return {start};
    throw InvalidInputError("log range needs 0 < start < stop and at least 2 points");
  }
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(points));
  const double lo = std::log(start);
  const double step = (std::log(stop) - lo) / (points - 1);
  for (int i = 0; i < points; ++i) v.push_back(std::exp(lo + step * i));
  v.front() = start;
  v.back() = stop;
  return v;
}

/// Values are in base units: seconds, watts, bytes, percent, or a fraction.
struct SweepSpec {
  SweepVariable variable = SweepVariable::sla;
  std::vector<double> values;
  std::vector<std::string> systems;
  SweepMode mode = SweepMode::performance;
  std::optional<Seconds> sla;           ///< fixed SLA when sweeping db_size/percent in performance mode
  std::optional<Watts> power_budget;    ///< fixed budget likewise in power mode
  CorePolicy core_policy = CorePolicy::full;
};

inline void validate(const SweepSpec& spec) {
  detail::require(!spec.values.empty(), "sweep needs at least one value");
  detail::require(!spec.systems.empty(), "sweep needs at least one system");
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    detail::require(detail::positive_finite(spec.values[i]), "sweep values must be positive");
    if (i > 0) detail::require(spec.values[i] > spec.values[i - 1], "sweep values must be strictly increasing");
  }
  if (auto m = implied_mode(spec.variable)) {
    detail::require(*m == spec.mode, "variable " + std::string(to_string(spec.variable)) +
                                         " requires mode " + std::string(to_string(*m)));
  } else {
    detail::require(spec.mode != SweepMode::memory_wall,
                    "memory-wall mode only sweeps fraction_read");
    if (spec.mode == SweepMode::performance) detail::require(spec.sla.has_value(), "performance sweep needs an sla");
    if (spec.mode == SweepMode::power) detail::require(spec.power_budget.has_value(), "power sweep needs a budget");
  }
}

struct SweepRow {
  std::string system;
  SweepVariable variable = SweepVariable::sla;
  double value = 0.0;
  bool feasible = false;
  ClusterDesign design;    ///< zero when infeasible
  ClusterMetrics metrics;  ///< zero when infeasible
  std::string reason;      ///< why the point is infeasible

  bool operator==(const SweepRow&) const = default;
};

/// Single-socket view behind the memory-wall curves: one chip with fully
/// populated channels reading `fraction` of its own capacity.
inline ProvisioningResult memory_wall_point(const SystemConfig& cfg, const SharedParams& shared,
                                            double fraction) {
  auto t = memory_wall_time(cfg, shared, fraction);
  WorkloadSpec work{cfg.socket_capacity(), cfg.socket_capacity() * fraction};
  auto design = design_for_capacity(cfg, shared, work.db_size);
  design.active_cores_per_chip = shared.max_chip_cores;
  ProvisioningResult r{design, evaluate(cfg, shared, work, design), BindingConstraint::capacity};
  r.metrics.response_time = t;
  r.metrics.energy_per_query = r.metrics.total_power * t;
  return r;
}

/// One row per (system, value), systems in the given order and values
/// ascending. Infeasible points are flagged rather than aborting the sweep.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SystemCatalog& catalog,
                                       const SharedParams& shared, const WorkloadSpec& work) {
  validate(spec);
  std::vector<const SystemConfig*> cfgs;
  for (const auto& name : spec.systems) cfgs.push_back(&catalog.find(name));

  std::vector<SweepRow> rows;
  rows.reserve(cfgs.size() * spec.values.size());
  for (const auto* cfg : cfgs) {
    for (double value : spec.values) {
      SweepRow row;
      row.system = cfg->name;
      row.variable = spec.variable;
      row.value = value;
      try {
        WorkloadSpec w = work;
        std::optional<Seconds> sla = spec.sla;
        std::optional<Watts> budget = spec.power_budget;
        switch (spec.variable) {
          case SweepVariable::sla: sla = Seconds(value); break;
          case SweepVariable::power_budget: budget = Watts(value); break;
          case SweepVariable::db_size: w.db_size = Bytes(value); break;
          case SweepVariable::percent_accessed: w = WorkloadSpec::from_percent(work.db_size, value); break;
          case SweepVariable::fraction_read: break;
        }
        ProvisioningResult r;
        switch (spec.mode) {
          case SweepMode::performance: r = provision_performance(*cfg, shared, w, *sla); break;
          case SweepMode::power: r = provision_power(*cfg, shared, w, *budget, spec.core_policy); break;
          case SweepMode::capacity: r = provision_capacity(*cfg, shared, w); break;
          case SweepMode::memory_wall: r = memory_wall_point(*cfg, shared, value); break;
        }
        row.feasible = true;
        row.design = r.design;
        row.metrics = r.metrics;
      } catch (const InfeasibleError& e) {
        row.reason = e.what();
      } catch (const InvalidInputError& e) {
        row.reason = e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// Sensitivity transforms.

inline SystemConfig scale_density(SystemConfig cfg, double factor) {
  if (!detail::positive_finite(factor)) throw InvalidInputError("density factor must be positive");
  cfg.module_capacity = cfg.module_capacity * factor;
  return cfg;
}

inline SharedParams scale_compute_power(SharedParams shared, double factor) {
  if (!detail::positive_finite(factor)) throw InvalidInputError("compute power factor must be positive");
  shared.core_power = shared.core_power * factor;
  return shared;
}

// Crossover search.

enum class CrossoverMetric { total_power, energy_per_query };

inline std::string_view to_string(CrossoverMetric m) {
  return m == CrossoverMetric::total_power ? "total_power" : "energy_per_query";
}

inline CrossoverMetric parse_crossover_metric(std::string_view s) {
  if (s == "total_power") return CrossoverMetric::total_power;
  if (s == "energy_per_query") return CrossoverMetric::energy_per_query;
  throw InvalidInputError("unknown crossover metric '" + std::string(s) +
                          "' (valid: total_power, energy_per_query)");
}

class NoCrossoverError : public std::runtime_error {
 public:
  NoCrossoverError(const std::string& what, bool a_below_at_lo, bool a_below_at_hi)
      : std::runtime_error(what), a_below_at_lo_(a_below_at_lo), a_below_at_hi_(a_below_at_hi) {}
  [[nodiscard]] bool a_below_at_lo() const { return a_below_at_lo_; }
  [[nodiscard]] bool a_below_at_hi() const { return a_below_at_hi_; }

 private:
  bool a_below_at_lo_;
  bool a_below_at_hi_;
};

struct CrossoverResult {
  std::string variable = "sla";
  Seconds crossover_value;
  CrossoverMetric metric = CrossoverMetric::total_power;
  Seconds bracket_lo;
  Seconds bracket_hi;
  /// Whether system a's metric is strictly below b's at each bracket end.
  bool a_below_at_lo = false;
  bool a_below_at_hi = false;

  bool operator==(const CrossoverResult&) const = default;
};

inline double crossover_metric(const SystemConfig& cfg, const SharedParams& shared,
                               const WorkloadSpec& work, Seconds sla, CrossoverMetric metric) {
  auto r = provision_performance(cfg, shared, work, sla);
  return metric == CrossoverMetric::total_power ? r.metrics.total_power.value()
                                                : r.metrics.energy_per_query.value();
}

/// Bisects the SLA range for the point where the performance-provisioned
/// metric of `a` and `b` swaps order. The curves are step functions, so the
/// answer is the midpoint of the final bracket.
inline CrossoverResult find_crossover(const SystemConfig& a, const SystemConfig& b,
                                      const SharedParams& shared, const WorkloadSpec& work,
                                      CrossoverMetric metric = CrossoverMetric::total_power,
                                      Seconds lo = Seconds(1e-3), Seconds hi = Seconds(10.0),
                                      double relative_width = 1e-3) {
  if (!(lo.value() > 0.0) || !(hi > lo)) throw InvalidInputError("crossover range needs 0 < lo < hi");
  if (!(relative_width > 0.0)) throw InvalidInputError("bracket width must be positive");

  auto a_below = [&](Seconds sla) {
    return crossover_metric(a, shared, work, sla, metric) < crossover_metric(b, shared, work, sla, metric);
  };
  const bool at_lo = a_below(lo);
  const bool at_hi = a_below(hi);
  if (at_lo == at_hi) {
    auto describe = [&](bool below) {
      return below ? a.name + " < " + b.name : a.name + " >= " + b.name;
    };
    throw NoCrossoverError("no crossover of " + std::string(to_string(metric)) + " in [" +
                               format_time(lo) + ", " + format_time(hi) + "]: " + describe(at_lo) +
                               " at " + format_time(lo) + " and " + describe(at_hi) + " at " +
                               format_time(hi),
                           at_lo, at_hi);
  }

  for (int i = 0; i < 200; ++i) {
    const Seconds mid = (lo + hi) / 2.0;
    if ((hi - lo).value() <= relative_width * mid.value()) break;
    if (a_below(mid) == at_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  CrossoverResult r;
  r.crossover_value = (lo + hi) / 2.0;
  r.metric = metric;
  r.bracket_lo = lo;
  r.bracket_hi = hi;
  r.a_below_at_lo = at_lo;
  r.a_below_at_hi = at_hi;
  return r;
}

// Reports.

struct EnergyRow {
  std::string system;
  Joules energy_per_query;
  Seconds response_time;
  Watts total_power;
};

/// Energy per query of each system provisioned for capacity.
inline std::vector<EnergyRow> energy_report(const SystemCatalog& catalog, const std::vector<std::string>& systems,
                                            const SharedParams& shared, const WorkloadSpec& work) {
  std::vector<EnergyRow> rows;
  for (const auto& name : systems) {
    const auto& cfg = catalog.find(name);
    auto r = provision_capacity(cfg, shared, work);
    rows.push_back({cfg.name, r.metrics.energy_per_query, r.metrics.response_time, r.metrics.total_power});
  }
  return rows;
}

struct BreakdownRow {
  std::string system;
  bool feasible = false;
  double compute_percent = 0.0;
  double memory_percent = 0.0;
  double overhead_percent = 0.0;
  Watts total_power;
  std::string reason;
};

/// Share of compute, memory and blade overhead in the power-provisioned cluster.
inline std::vector<BreakdownRow> power_breakdown(const SystemCatalog& catalog,
                                                 const std::vector<std::string>& systems,
                                                 const SharedParams& shared, const WorkloadSpec& work,
                                                 Watts budget, CorePolicy policy = CorePolicy::full) {
  std::vector<BreakdownRow> rows;
  for (const auto& name : systems) {
    const auto& cfg = catalog.find(name);
    BreakdownRow row;
    row.system = cfg.name;
    try {
      auto m = provision_power(cfg, shared, work, budget, policy).metrics;
      row.feasible = true;
      row.total_power = m.total_power;
      row.compute_percent = 100.0 * (m.compute_power / m.total_power);
      row.memory_percent = 100.0 * (m.mem_power / m.total_power);
      row.overhead_percent = 100.0 * (m.overhead_power / m.total_power);
    } catch (const InfeasibleError& e) {
      row.reason = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace bwmodel
