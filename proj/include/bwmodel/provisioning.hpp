#pragma once

// Cluster sizing under a response-time SLA, a power budget or a fixed data
// capacity.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bwmodel/model.hpp"

namespace bwmodel {

enum class Mode { performance, power, capacity };
enum class BindingConstraint { bandwidth, capacity, power };

/// Cores powered per chip when power provisioning: every core on the chip, or
/// only as many as the chip bandwidth can feed.
enum class CorePolicy { full, matched };

class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, Watts minimum_budget)
      : std::runtime_error(what), minimum_budget_(minimum_budget) {}
  [[nodiscard]] Watts minimum_budget() const { return minimum_budget_; }

 private:
  Watts minimum_budget_;
};

struct ProvisioningRequest {
  Mode mode = Mode::capacity;
  std::optional<Seconds> sla;
  std::optional<Watts> power_budget;
  WorkloadSpec workload;
  CorePolicy core_policy = CorePolicy::full;
};

struct ProvisioningResult {
  ClusterDesign design;
  ClusterMetrics metrics;
  BindingConstraint binding_constraint = BindingConstraint::capacity;

  bool operator==(const ProvisioningResult&) const = default;
};

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::performance: return "performance";
    case Mode::power: return "power";
    case Mode::capacity: return "capacity";
  }
  return "?";
}

inline std::string_view to_string(BindingConstraint b) {
  switch (b) {
    case BindingConstraint::bandwidth: return "bandwidth";
    case BindingConstraint::capacity: return "capacity";
    case BindingConstraint::power: return "power";
  }
  return "?";
}

inline std::string_view to_string(CorePolicy p) { return p == CorePolicy::full ? "full" : "matched"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "performance") return Mode::performance;
  if (s == "power") return Mode::power;
  if (s == "capacity") return Mode::capacity;
  throw InvalidInputError("unknown mode '" + std::string(s) + "' (valid: performance, power, capacity)");
}

inline CorePolicy parse_core_policy(std::string_view s) {
  if (s == "full") return CorePolicy::full;
  if (s == "matched") return CorePolicy::matched;
  throw InvalidInputError("unknown core policy '" + std::string(s) + "' (valid: full, matched)");
}

inline ProvisioningResult provision_capacity(const SystemConfig& cfg, const SharedParams& shared,
                                             const WorkloadSpec& work) {
  validate(cfg);
  validate(shared);
  validate(work);
  auto design = design_for_capacity(cfg, shared, work.db_size);
  return {design, evaluate(cfg, shared, work, design), BindingConstraint::capacity};
}

/// Adds chips until the aggregate throughput meets the SLA; extra chips come
/// with fully populated channels.
inline ProvisioningResult provision_performance(const SystemConfig& cfg, const SharedParams& shared,
                                                const WorkloadSpec& work, Seconds sla) {
  validate(cfg);
  validate(shared);
  validate(work);
  if (!detail::positive_finite(sla.value())) throw InvalidInputError("sla must be positive");

  const auto base = design_for_capacity(cfg, shared, work.db_size);
  const auto full_perf = chip_perf(cfg, shared, shared.max_chip_cores);
  const BytesPerSecond required = work.bytes_accessed / sla;

  auto meets = [&](BytesPerSecond per_chip, Count chips) {
    return response_time(work.bytes_accessed, per_chip, chips) <= sla;
  };

  Count bw_chips = std::max<Count>(1, detail::ceil_count(required / full_perf, "compute chip count"));
  while (bw_chips > 1 && meets(full_perf, bw_chips - 1)) --bw_chips;
  while (!meets(full_perf, bw_chips)) ++bw_chips;

  ClusterDesign d;
  ProvisioningResult r;
  if (bw_chips > base.compute_chips) {
    d.compute_chips = bw_chips;
    d.mem_modules = bw_chips * cfg.modules_per_chip();
    r.binding_constraint = BindingConstraint::bandwidth;
  } else {
    d.compute_chips = base.compute_chips;
    d.mem_modules = base.mem_modules;
    r.binding_constraint = BindingConstraint::capacity;
  }
  d.blades = detail::ceil_div(d.compute_chips, cfg.blade_chips);

  // Fewest cores per chip that still meet the SLA.
  Count cores = bandwidth_matched_cores(cfg, shared, required / static_cast<double>(d.compute_chips));
  while (cores > 1 && meets(chip_perf(cfg, shared, cores - 1), d.compute_chips)) --cores;
  while (cores < shared.max_chip_cores && !meets(chip_perf(cfg, shared, cores), d.compute_chips)) ++cores;
  d.active_cores_per_chip = cores;

  r.design = d;
  r.metrics = evaluate(cfg, shared, work, d);
  return r;
}

/// Expands to as many fully populated blades as the budget allows when the
/// budget covers the capacity design at full power; otherwise keeps the
/// capacity design and throttles the active cores per chip.
inline ProvisioningResult provision_power(const SystemConfig& cfg, const SharedParams& shared,
                                          const WorkloadSpec& work, Watts budget,
                                          CorePolicy policy = CorePolicy::full) {
  validate(cfg);
  validate(shared);
  validate(work);
  if (!detail::positive_finite(budget.value())) throw InvalidInputError("power budget must be positive");

  const auto base = design_for_capacity(cfg, shared, work.db_size);
  const Count core_cap = policy == CorePolicy::full ? shared.max_chip_cores : base.active_cores_per_chip;

  auto populated = [&](Count blades) {
    ClusterDesign d;
    d.blades = blades;
    d.compute_chips = blades * cfg.blade_chips;
    d.mem_modules = d.compute_chips * cfg.modules_per_chip();
    d.active_cores_per_chip = core_cap;
    return d;
  };
  auto power_of = [&](const ClusterDesign& d) { return evaluate(cfg, shared, work, d).total_power; };

  ProvisioningResult r;
  if (power_of(populated(base.blades)) <= budget) {
    const Watts blade_power = power_of(populated(1));
    Count blades = detail::ceil_count(std::floor(budget / blade_power), "blade count");
    while (blades > base.blades && power_of(populated(blades)) > budget) --blades;
    while (power_of(populated(blades + 1)) <= budget) ++blades;
    r.design = populated(blades);
    r.binding_constraint = BindingConstraint::power;
  } else {
    ClusterDesign d = base;
    d.active_cores_per_chip = 1;
    const auto at_one_core = evaluate(cfg, shared, work, d);
    if (at_one_core.total_power > budget) {
      throw InfeasibleError("power budget " + format_power(budget) + " is below the " +
                                std::string(cfg.name) + " capacity design at one core per chip (" +
                                format_power(at_one_core.total_power) + ")",
                            at_one_core.total_power);
    }
    // Eq. 10 is affine in the core count; start from the closed form and settle.
    const Watts per_core = shared.core_power * static_cast<double>(d.compute_chips);
    const Watts headroom = budget - (at_one_core.mem_power + at_one_core.overhead_power);
    Count cores = std::clamp<Count>(
        static_cast<Count>(std::floor(std::min(headroom / per_core, static_cast<double>(core_cap)))), 1,
        core_cap);
    auto with_cores = [&](Count c) {
      ClusterDesign t = d;
      t.active_cores_per_chip = c;
      return t;
    };
    while (cores > 1 && power_of(with_cores(cores)) > budget) --cores;
    while (cores < core_cap && power_of(with_cores(cores + 1)) <= budget) ++cores;
    r.design = with_cores(cores);
    r.binding_constraint = BindingConstraint::capacity;
  }
  r.metrics = evaluate(cfg, shared, work, r.design);
  return r;
}

inline ProvisioningResult provision(const SystemConfig& cfg, const SharedParams& shared,
                                    const ProvisioningRequest& req) {
  switch (req.mode) {
    case Mode::performance:
      if (!req.sla) throw InvalidInputError("performance mode requires an sla");
      return provision_performance(cfg, shared, req.workload, *req.sla);
    case Mode::power:
      if (!req.power_budget) throw InvalidInputError("power mode requires a power budget");
      return provision_power(cfg, shared, req.workload, *req.power_budget, req.core_policy);
    case Mode::capacity:
      return provision_capacity(cfg, shared, req.workload);
  }
  throw InvalidInputError("unknown provisioning mode");
}

}  // namespace bwmodel
