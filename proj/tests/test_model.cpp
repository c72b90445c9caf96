#include <gtest/gtest.h>

#include "bwmodel/model.hpp"
#include "generators.hpp"
#include "oracle.hpp"

using namespace bwmodel;
using namespace bwmodel::literals;

namespace {

const SystemConfig& traditional() {
  static const auto s = preset_system("traditional").system;
  return s;
}
const SystemConfig& big_memory() {
  static const auto s = preset_system("big-memory").system;
  return s;
}
const SystemConfig& die_stacked() {
  static const auto s = preset_system("die-stacked").system;
  return s;
}

}  // namespace

TEST(Presets, TableValues) {
  const auto& t = traditional();
  EXPECT_EQ(t.module_capacity, 32_GB);
  EXPECT_EQ(t.channel_bandwidth, 25.6_GBps);
  EXPECT_EQ(t.memory_channels, 4);
  EXPECT_EQ(t.channel_modules, 2);
  EXPECT_EQ(t.module_power, 8_W);
  EXPECT_EQ(t.blade_chips, 4);

  const auto& d = die_stacked();
  EXPECT_EQ(d.module_capacity, 8_GB);
  EXPECT_EQ(d.channel_bandwidth, 256_GBps);
  EXPECT_EQ(d.memory_channels, 1);
  EXPECT_EQ(d.channel_modules, 1);
  EXPECT_EQ(d.module_power, 10_W);
  EXPECT_EQ(d.blade_chips, 9);

  EXPECT_EQ(big_memory().socket_capacity(), 2_TB);
}

TEST(Presets, SharedParamsIdentical) {
  for (const auto& n : preset_names()) {
    auto p = preset_system(n);
    EXPECT_EQ(p.shared, default_shared());
    EXPECT_EQ(p.shared.blade_overhead_power, 100_W);
    EXPECT_EQ(p.shared.core_perf, 6_GBps);
    EXPECT_EQ(p.shared.core_power, 3_W);
    EXPECT_EQ(p.shared.max_chip_cores, 32);
    EXPECT_NO_THROW(validate(p.system));
  }
}

TEST(Presets, UnknownNameListsValidOnes) {
  try {
    preset_system("quantum");
    FAIL() << "expected an error";
  } catch (const InvalidInputError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("quantum"), std::string::npos);
    EXPECT_NE(msg.find("traditional"), std::string::npos);
    EXPECT_NE(msg.find("big-memory"), std::string::npos);
    EXPECT_NE(msg.find("die-stacked"), std::string::npos);
  }
}

TEST(ChipBandwidth, Examples) {
  EXPECT_EQ(chip_bandwidth(traditional()), 102.4_GBps);
  EXPECT_EQ(chip_bandwidth(big_memory()), 192_GBps);
  auto one = traditional();
  one.memory_channels = 1;
  EXPECT_EQ(chip_bandwidth(one), one.channel_bandwidth);
}

TEST(ChipPerf, Examples) {
  const auto sh = default_shared();
  EXPECT_EQ(chip_perf(traditional(), sh, 32), 102.4_GBps);
  EXPECT_EQ(chip_perf(die_stacked(), sh, 32), 192_GBps);
  EXPECT_EQ(chip_perf(die_stacked(), sh, 1), 6_GBps);
  EXPECT_THROW(chip_perf(die_stacked(), sh, 0), InvalidInputError);
  EXPECT_THROW(chip_perf(die_stacked(), sh, 33), InvalidInputError);
}

TEST(BandwidthMatchedCores, Examples) {
  const auto sh = default_shared();
  EXPECT_EQ(bandwidth_matched_cores(traditional(), sh, chip_bandwidth(traditional())), 18);
  EXPECT_EQ(bandwidth_matched_cores(big_memory(), sh, chip_bandwidth(big_memory())), 32);
  // die-stacked bandwidth outruns 32 cores; capped at the chip maximum
  EXPECT_EQ(bandwidth_matched_cores(die_stacked(), sh, chip_bandwidth(die_stacked())), 32);
  for (const auto& n : preset_names()) {
    EXPECT_EQ(bandwidth_matched_cores(preset_system(n).system, sh, sh.core_perf), 1);
  }
  EXPECT_THROW(bandwidth_matched_cores(traditional(), sh, BytesPerSecond(0)), InvalidInputError);
}

TEST(DesignForCapacity, FigureTwoBlades) {
  const auto sh = default_shared();
  auto t = design_for_capacity(traditional(), sh, 16_TB);
  EXPECT_EQ(t, (ClusterDesign{512, 64, 18, 16}));
  auto b = design_for_capacity(big_memory(), sh, 16_TB);
  EXPECT_EQ(b, (ClusterDesign{32, 8, 32, 8}));
  auto d = design_for_capacity(die_stacked(), sh, 16_TB);
  EXPECT_EQ(d, (ClusterDesign{2048, 2048, 32, 228}));
}

TEST(DesignForCapacity, SingleSocket) {
  const auto sh = default_shared();
  for (const auto& n : preset_names()) {
    const auto cfg = preset_system(n).system;
    auto d = design_for_capacity(cfg, sh, cfg.socket_capacity());
    EXPECT_EQ(d.compute_chips, 1) << n;
    EXPECT_EQ(d.blades, 1) << n;
  }
}

TEST(DesignForCapacity, PartialModuleRoundsUp) {
  auto d = design_for_capacity(traditional(), default_shared(), 16_TB + Bytes(1));
  EXPECT_EQ(d.mem_modules, 513);
  EXPECT_EQ(d.compute_chips, 65);
  EXPECT_EQ(d.blades, 17);
  EXPECT_THROW(design_for_capacity(traditional(), default_shared(), Bytes(0)), InvalidInputError);
}

// Frozen from a hand evaluation of the equations (see oracle.hpp).
TEST(Evaluate, CapacityDesignsAtSixteenTerabytes) {
  const auto sh = default_shared();
  const auto work = default_workload();
  struct Case {
    const SystemConfig& cfg;
    double rt, total, mem, compute, overhead;
  };
  const Case cases[] = {
      {traditional(), 0.5, 9152, 4096, 3456, 1600},
      {big_memory(), 2.1333333333333333, 4768, 3200, 768, 800},
      {die_stacked(), 0.008333333333333333, 239888, 20480, 196608, 22800},
  };
  for (const auto& c : cases) {
    auto m = evaluate(c.cfg, sh, work, design_for_capacity(c.cfg, sh, work.db_size));
    EXPECT_DOUBLE_EQ(m.response_time.value(), c.rt) << c.cfg.name;
    EXPECT_EQ(m.total_power.value(), c.total) << c.cfg.name;
    EXPECT_EQ(m.mem_power.value(), c.mem) << c.cfg.name;
    EXPECT_EQ(m.compute_power.value(), c.compute) << c.cfg.name;
    EXPECT_EQ(m.overhead_power.value(), c.overhead) << c.cfg.name;
    EXPECT_EQ(m.total_capacity, 16_TB) << c.cfg.name;
    EXPECT_EQ(m.overprovision_factor, 1.0) << c.cfg.name;
    EXPECT_DOUBLE_EQ(m.energy_per_query.value(), c.total * c.rt) << c.cfg.name;
  }
}

TEST(Evaluate, ResponseTimesMatchIntroduction) {
  const auto sh = default_shared();
  const auto work = default_workload();
  auto rt = [&](const SystemConfig& c) {
    return evaluate(c, sh, work, design_for_capacity(c, sh, work.db_size)).response_time.value();
  };
  EXPECT_NEAR(rt(big_memory()), 2.08, 0.08);
  EXPECT_NEAR(rt(traditional()), 0.49, 0.49 * 0.05);
  const double die = evaluate(die_stacked(), sh, work, design_for_capacity(die_stacked(), sh, work.db_size))
                         .total_power.value();
  for (const auto* c : {&traditional(), &big_memory()}) {
    const double other = evaluate(*c, sh, work, design_for_capacity(*c, sh, work.db_size)).total_power.value();
    EXPECT_GE(die / other, 26.0 * 0.9);
    EXPECT_LE(die / other, 50.0 * 1.1);
  }
}

TEST(Evaluate, ThrottledDesignRunsSlower) {
  const auto sh = default_shared();
  const auto work = default_workload();
  auto d = design_for_capacity(die_stacked(), sh, work.db_size);
  auto fast = evaluate(die_stacked(), sh, work, d);
  d.active_cores_per_chip = 1;
  auto slow = evaluate(die_stacked(), sh, work, d);
  EXPECT_DOUBLE_EQ(slow.response_time.value() / fast.response_time.value(), 32.0);
  EXPECT_EQ(slow.compute_power.value(), 2048.0 * 3.0);
}

TEST(Evaluate, RejectsMismatchedDesigns) {
  const auto sh = default_shared();
  const auto work = default_workload();
  auto d = design_for_capacity(traditional(), sh, work.db_size);
  auto bad = d;
  bad.compute_chips = 63;  // 512 modules need 64 chips
  EXPECT_THROW(evaluate(traditional(), sh, work, bad), InvalidInputError);
  bad = d;
  bad.blades = 15;
  EXPECT_THROW(evaluate(traditional(), sh, work, bad), InvalidInputError);
  bad = d;
  bad.active_cores_per_chip = 0;
  EXPECT_THROW(evaluate(traditional(), sh, work, bad), InvalidInputError);
  bad = d;
  bad.active_cores_per_chip = 33;
  EXPECT_THROW(evaluate(traditional(), sh, work, bad), InvalidInputError);
}

TEST(MemoryWall, Examples) {
  const auto sh = default_shared();
  EXPECT_NEAR(memory_wall_time(die_stacked(), sh, 0.2).value(), 0.008333, 1e-6);
  EXPECT_LT(memory_wall_time(die_stacked(), sh, 0.2), 10_ms);
  EXPECT_NEAR(memory_wall_time(big_memory(), sh, 0.2).value(), 2.1333, 1e-4);
  EXPECT_DOUBLE_EQ(memory_wall_time(traditional(), sh, 0.2).value(), 0.5);
  for (double f : {0.001, 0.01, 0.3, 1.0}) {
    EXPECT_DOUBLE_EQ(memory_wall_time(traditional(), sh, f).value(),
                     f / 0.2 * memory_wall_time(traditional(), sh, 0.2).value());
  }
  EXPECT_THROW(memory_wall_time(traditional(), sh, 0.0), InvalidInputError);
  EXPECT_THROW(memory_wall_time(traditional(), sh, 1.5), InvalidInputError);
}

TEST(BandwidthCapacityRatio, Examples) {
  auto die = bandwidth_capacity_ratio(die_stacked());
  EXPECT_DOUBLE_EQ(die / bandwidth_capacity_ratio(traditional()), 80.0);
  EXPECT_NEAR(die / bandwidth_capacity_ratio(big_memory()), 341.33, 0.01);
  SystemConfig unit{"unit", 64_GB, 64_GBps, 1, 1, 1_W, 1};
  EXPECT_EQ(bandwidth_capacity_ratio(unit).value(), 1.0);
}

TEST(Validation, SystemConfig) {
  auto c = traditional();
  c.memory_channels = 0;
  EXPECT_THROW(validate(c), InvalidInputError);
  c = traditional();
  c.module_power = Watts(-1);
  EXPECT_THROW(validate(c), InvalidInputError);
  c = traditional();
  c.module_capacity = Bytes(std::nan(""));
  EXPECT_THROW(validate(c), InvalidInputError);
}

TEST(Validation, Workload) {
  EXPECT_THROW(validate(WorkloadSpec{16_TB, 17_TB}), InvalidInputError);
  EXPECT_THROW(validate(WorkloadSpec{16_TB, Bytes(0)}), InvalidInputError);
  EXPECT_NO_THROW(validate(WorkloadSpec{16_TB, 16_TB}));
}

TEST(Catalog, FindAndUpsert) {
  auto cat = SystemCatalog::presets();
  EXPECT_EQ(cat.systems().size(), 3u);
  EXPECT_EQ(cat.find("big-memory").blade_chips, 1);
  EXPECT_THROW((void)cat.find("nope"), InvalidInputError);
  auto dense = cat.find("die-stacked");
  dense.module_capacity = 64_GB;
  cat.upsert(dense);
  EXPECT_EQ(cat.systems().size(), 3u);
  EXPECT_EQ(cat.find("die-stacked").module_capacity, 64_GB);
}

TEST(Evaluate, AgreesWithOracleOnRandomDesigns) {
  gen::Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    auto cfg = gen::system(rng);
    auto sh = gen::shared(rng);
    auto work = gen::workload(rng, cfg);
    auto d = design_for_capacity(cfg, sh, work.db_size);
    EXPECT_EQ(gen::to_oracle(d), oracle::capacity_design(gen::to_oracle(cfg), gen::to_oracle(sh), work.db_size.value()));
    d.active_cores_per_chip = rng.integer(1, sh.max_chip_cores);
    d.blades += rng.integer(0, 2);
    auto m = evaluate(cfg, sh, work, d);
    auto o = oracle::eval(gen::to_oracle(cfg), gen::to_oracle(sh), work.db_size.value(), work.bytes_accessed.value(),
                          gen::to_oracle(d));
    EXPECT_EQ(m.response_time.value(), o.rt);
    EXPECT_EQ(m.total_power.value(), o.total);
    EXPECT_EQ(m.total_capacity.value(), o.capacity);
  }
}
