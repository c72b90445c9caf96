#pragma once

// Analytical model of a bandwidth-bound in-memory cluster: memory modules,
// compute chips and blades sized from capacity, then response time and
// power derived from the memory hierarchy and per-core compute constants.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "bwmodel/units.hpp"

namespace bwmodel {

using Count = std::int64_t;

/// Memory hierarchy of one server architecture.
struct SystemConfig {
  std::string name;
  Bytes module_capacity;             ///< capacity of one memory module
  BytesPerSecond channel_bandwidth;  ///< peak bandwidth of one channel
  Count memory_channels = 0;         ///< channels per compute chip
  Count channel_modules = 0;         ///< modules populated per channel
  Watts module_power;                ///< power of one active module
  Count blade_chips = 0;             ///< compute chips per blade

  [[nodiscard]] Count modules_per_chip() const { return memory_channels * channel_modules; }
  [[nodiscard]] Bytes socket_capacity() const {
    return module_capacity * static_cast<double>(modules_per_chip());
  }

  bool operator==(const SystemConfig&) const = default;
};

/// Compute and blade constants shared by every architecture.
struct SharedParams {
  BytesPerSecond core_perf;  ///< data processed per second by one core
  Watts core_power;          ///< power of one active core
  Count max_chip_cores = 0;
  Watts blade_overhead_power;  ///< peripherals, per blade

  bool operator==(const SharedParams&) const = default;
};

struct WorkloadSpec {
  Bytes db_size;
  Bytes bytes_accessed;  ///< touched by one query

  static WorkloadSpec from_percent(Bytes db_size, double percent_accessed) {
    return WorkloadSpec{db_size, db_size * (percent_accessed / 100.0)};
  }
  [[nodiscard]] double percent_accessed() const { return 100.0 * (bytes_accessed / db_size); }

  bool operator==(const WorkloadSpec&) const = default;
};

struct ClusterDesign {
  Count mem_modules = 0;
  Count compute_chips = 0;
  Count active_cores_per_chip = 0;
  Count blades = 0;

  bool operator==(const ClusterDesign&) const = default;
};

struct ClusterMetrics {
  BytesPerSecond chip_bandwidth;
  BytesPerSecond chip_perf;  ///< at the design's active core count
  BytesPerSecond aggregate_perf;
  BytesPerSecond aggregate_bandwidth;  ///< chip_bandwidth x compute_chips
  Seconds response_time;
  Watts mem_power;
  Watts compute_power;
  Watts overhead_power;
  Watts total_power;
  Bytes total_capacity;
  double overprovision_factor = 0.0;
  Joules energy_per_query;

  bool operator==(const ClusterMetrics&) const = default;
};

struct Preset {
  SystemConfig system;
  SharedParams shared;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInputError(what);
}

inline bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

// Largest count representable exactly as a double.
inline constexpr double kMaxCount = 9007199254740992.0;

inline Count ceil_count(double v, const char* what) {
  double c = std::ceil(v);
  if (!std::isfinite(c) || c > kMaxCount) {
    throw InvalidInputError(std::string(what) + " exceeds the representable range");
  }
  return static_cast<Count>(c);
}

inline Count ceil_div(Count a, Count b) { return (a + b - 1) / b; }

}  // namespace detail

inline void validate(const SystemConfig& cfg) {
  using detail::positive_finite;
  using detail::require;
  const std::string who = "system '" + cfg.name + "': ";
  require(!cfg.name.empty(), "system name must be non-empty");
  require(positive_finite(cfg.module_capacity.value()), who + "module_capacity must be positive");
  require(positive_finite(cfg.channel_bandwidth.value()),
          who + "channel_bandwidth must be positive");
  require(cfg.memory_channels >= 1, who + "memory_channels must be >= 1");
  require(cfg.channel_modules >= 1, who + "channel_modules must be >= 1");
  require(positive_finite(cfg.module_power.value()), who + "module_power must be positive");
  require(cfg.blade_chips >= 1, who + "blade_chips must be >= 1");
}

inline void validate(const SharedParams& shared) {
  using detail::positive_finite;
  using detail::require;
  require(positive_finite(shared.core_perf.value()), "core_perf must be positive");
  require(positive_finite(shared.core_power.value()), "core_power must be positive");
  require(shared.max_chip_cores >= 1, "max_chip_cores must be >= 1");
  require(positive_finite(shared.blade_overhead_power.value()),
          "blade_overhead_power must be positive");
}

inline void validate(const WorkloadSpec& work) {
  using detail::positive_finite;
  detail::require(positive_finite(work.db_size.value()), "db_size must be positive");
  detail::require(positive_finite(work.bytes_accessed.value()),
                  "bytes accessed per query must be positive");
  detail::require(work.bytes_accessed <= work.db_size,
                  "bytes accessed per query cannot exceed db_size");
}

inline void validate(const ClusterDesign& design, const SystemConfig& cfg,
                     const SharedParams& shared) {
  using detail::require;
  require(design.mem_modules >= 1 && design.compute_chips >= 1 && design.blades >= 1 &&
              design.active_cores_per_chip >= 1,
          "design counts must all be >= 1");
  require(design.active_cores_per_chip <= shared.max_chip_cores,
          "active_cores_per_chip exceeds max_chip_cores");
  require(design.compute_chips >= detail::ceil_div(design.mem_modules, cfg.modules_per_chip()),
          "too few compute chips to attach " + std::to_string(design.mem_modules) + " modules");
  require(design.blades >= detail::ceil_div(design.compute_chips, cfg.blade_chips),
          "too few blades to hold " + std::to_string(design.compute_chips) + " chips");
}

inline std::vector<std::string> preset_names() { return {"traditional", "big-memory", "die-stacked"}; }

inline SharedParams default_shared() {
  using namespace literals;
  return SharedParams{6_GBps, 3_W, 32, 100_W};
}

inline Preset preset_system(std::string_view name) {
  using namespace literals;
  if (name == "traditional") return {{"traditional", 32_GB, 25.6_GBps, 4, 2, 8_W, 4}, default_shared()};
  if (name == "big-memory") return {{"big-memory", 512_GB, 48_GBps, 4, 1, 100_W, 1}, default_shared()};
  if (name == "die-stacked") return {{"die-stacked", 8_GB, 256_GBps, 1, 1, 10_W, 9}, default_shared()};
  std::string valid;
  for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw InvalidInputError("unknown system preset '" + std::string(name) + "' (valid: " + valid + ")");
}

inline WorkloadSpec default_workload() {
  using namespace literals;
  return WorkloadSpec::from_percent(16_TB, 20.0);
}

/// Ordered set of named system configurations.
class SystemCatalog {
 public:
  SystemCatalog() = default;
  explicit SystemCatalog(std::vector<SystemConfig> systems) : systems_(std::move(systems)) {}

  static SystemCatalog presets() {
    std::vector<SystemConfig> v;
    for (const auto& n : preset_names()) v.push_back(preset_system(n).system);
    return SystemCatalog(std::move(v));
  }

  [[nodiscard]] const SystemConfig* try_find(std::string_view name) const {
    for (const auto& s : systems_) {
      if (s.name == name) return &s;
    }
    return nullptr;
  }

  [[nodiscard]] const SystemConfig& find(std::string_view name) const {
    if (const auto* s = try_find(name)) return *s;
    std::string valid;
    for (const auto& s : systems_) valid += (valid.empty() ? "" : ", ") + s.name;
    throw InvalidInputError("unknown system '" + std::string(name) + "' (valid: " + valid + ")");
  }

  void upsert(SystemConfig cfg) {
    for (auto& s : systems_) {
      if (s.name == cfg.name) {
        s = std::move(cfg);
        return;
      }
    }
    systems_.push_back(std::move(cfg));
  }

  [[nodiscard]] const std::vector<SystemConfig>& systems() const { return systems_; }

  bool operator==(const SystemCatalog&) const = default;

 private:
  std::vector<SystemConfig> systems_;
};

inline BytesPerSecond chip_bandwidth(const SystemConfig& cfg) {
  return static_cast<double>(cfg.memory_channels) * cfg.channel_bandwidth;
}

/// Per-chip throughput: the lesser of the cores' processing rate and the
/// chip's memory bandwidth.
inline BytesPerSecond chip_perf(const SystemConfig& cfg, const SharedParams& shared,
                                Count active_cores) {
  if (active_cores < 1 || active_cores > shared.max_chip_cores) {
    throw InvalidInputError("active cores " + std::to_string(active_cores) + " outside [1, " +
                            std::to_string(shared.max_chip_cores) + "]");
  }
  return std::min(shared.core_perf * static_cast<double>(active_cores), chip_bandwidth(cfg));
}

/// Cores needed per chip to sustain `target_per_chip`, capped by what a fully
/// populated chip can achieve.
inline Count bandwidth_matched_cores(const SystemConfig& cfg, const SharedParams& shared,
                                     BytesPerSecond target_per_chip) {
  if (!(target_per_chip.value() > 0.0)) {
    throw InvalidInputError("per-chip throughput target must be positive");
  }
  auto achievable = std::min(target_per_chip, chip_perf(cfg, shared, shared.max_chip_cores));
  auto cores = detail::ceil_count(achievable / shared.core_perf, "core count");
  return std::clamp<Count>(cores, 1, shared.max_chip_cores);
}

inline ClusterDesign design_for_capacity(const SystemConfig& cfg, const SharedParams& shared,
                                         Bytes db_size) {
  if (!detail::positive_finite(db_size.value())) throw InvalidInputError("db_size must be positive");
  ClusterDesign d;
  d.mem_modules = detail::ceil_count(db_size / cfg.module_capacity, "module count");
  d.compute_chips = detail::ceil_div(d.mem_modules, cfg.modules_per_chip());
  d.blades = detail::ceil_div(d.compute_chips, cfg.blade_chips);
  d.active_cores_per_chip = bandwidth_matched_cores(cfg, shared, chip_bandwidth(cfg));
  return d;
}

/// Response time of scanning `bytes_accessed` with `chips` chips each running
/// at `per_chip`. Every solver compares against this exact expression.
inline Seconds response_time(Bytes bytes_accessed, BytesPerSecond per_chip, Count chips) {
  return bytes_accessed / (per_chip * static_cast<double>(chips));
}

inline ClusterMetrics evaluate(const SystemConfig& cfg, const SharedParams& shared,
                               const WorkloadSpec& work, const ClusterDesign& design) {
  validate(design, cfg, shared);
  const auto chips = static_cast<double>(design.compute_chips);

  ClusterMetrics m;
  m.chip_bandwidth = chip_bandwidth(cfg);
  m.chip_perf = chip_perf(cfg, shared, design.active_cores_per_chip);
  m.aggregate_perf = m.chip_perf * chips;
  m.aggregate_bandwidth = m.chip_bandwidth * chips;
  m.response_time = response_time(work.bytes_accessed, m.chip_perf, design.compute_chips);
  m.mem_power = static_cast<double>(design.mem_modules) * cfg.module_power;
  m.compute_power = static_cast<double>(design.active_cores_per_chip) * shared.core_power * chips;
  m.overhead_power = static_cast<double>(design.blades) * shared.blade_overhead_power;
  m.total_power = m.mem_power + m.compute_power + m.overhead_power;
  m.total_capacity = static_cast<double>(design.mem_modules) * cfg.module_capacity;
  m.overprovision_factor = m.total_capacity / work.db_size;
  m.energy_per_query = m.total_power * m.response_time;
  return m;
}

/// Time for one socket to read `fraction` of its own memory at full speed.
inline Seconds memory_wall_time(const SystemConfig& cfg, const SharedParams& shared, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidInputError("fraction must lie in (0, 1]");
  }
  return (cfg.socket_capacity() * fraction) / chip_perf(cfg, shared, shared.max_chip_cores);
}

/// Bandwidth per byte of per-socket capacity.
inline PerSecond bandwidth_capacity_ratio(const SystemConfig& cfg) {
  return chip_bandwidth(cfg) / cfg.socket_capacity();
}

}  // namespace bwmodel
