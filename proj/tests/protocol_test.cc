#include <algorithm>
#include <numeric>
#include <random>

#include "cpon/analysis.h"
#include "cpon/error.h"
#include "cpon/protocol.h"
#include "doctest.h"

using namespace cpon;
using doctest::Approx;

namespace {

CircuitRecord Circuit(uint64_t id, int onu, int cls, int64_t start = 0) {
  CircuitRecord r;
  r.id = id;
  r.onu = onu;
  r.cls = cls;
  r.start_cycle = start;
  return r;
}

// Abstract time units: C = 1 so that grant arithmetic is in the units given.
ScenarioConfig Units(int onus) {
  ScenarioConfig c;
  c.onus = onus;
  c.report_bits = 0.0;
  return c;
}

double Sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("admission on the empty knapsack") {
  const ScenarioConfig cfg;
  for (int k = 0; k < 3; ++k) {
    AdmissionState s(cfg.classes, 2e9);
    CHECK(AdmitCircuit(s, Circuit(1, 0, k)) == AdmissionDecision::kAdmitted);
    CHECK(s.beta() == cfg.classes.rate(k));
  }
}

TEST_CASE("admission boundary at C_c") {
  const CircuitClassSet classes({52e6, 156e6, 1e6}, {0.4, 0.4, 0.2});
  AdmissionState s(classes, 2e9);
  // Fill to 1.95 Gb/s: 37 x 52 Mb/s = 1.924, plus 26 x 1 Mb/s.
  uint64_t id = 0;
  for (int i = 0; i < 37; ++i) REQUIRE(s.Admit(Circuit(++id, i % 4, 0)) == AdmissionDecision::kAdmitted);
  for (int i = 0; i < 26; ++i) REQUIRE(s.Admit(Circuit(++id, 5, 2)) == AdmissionDecision::kAdmitted);
  CHECK(s.beta() == Approx(1.95e9));
  const auto before = s.counts();
  CHECK(s.Admit(Circuit(++id, 1, 1)) == AdmissionDecision::kBlocked);
  CHECK(s.counts() == before);
  CHECK(s.beta() == Approx(1.95e9));

  // 1.948 Gb/s + 52 Mb/s = 2.0 Gb/s exactly.
  REQUIRE(s.Release(5, id - 1));
  REQUIRE(s.Release(5, id - 2));
  CHECK(s.beta() == Approx(1.948e9));
  CHECK(s.Admit(Circuit(++id, 2, 0)) == AdmissionDecision::kAdmitted);
  CHECK(s.beta() == Approx(2e9));
}

TEST_CASE("release bookkeeping") {
  const ScenarioConfig cfg;
  AdmissionState s(cfg.classes, 2e9);
  s.Admit(Circuit(1, 3, 0));
  s.Admit(Circuit(2, 3, 1));
  s.Admit(Circuit(3, 7, 0));
  CHECK(s.eta() == 2);
  CHECK(s.counts() == std::vector<int>{2, 1, 0});
  CHECK_FALSE(s.Release(3, 99));
  CHECK_FALSE(s.Release(4, 1));
  CHECK(s.Release(3, 1));
  CHECK(s.Release(3, 2));
  CHECK(s.eta() == 1);
  CHECK(s.beta() == 52e6);
}

TEST_CASE("property: admission never exceeds C_c") {
  const ScenarioConfig cfg;
  std::mt19937_64 rng(99);
  for (double limit : {2e9, 4e9, 0.7e9}) {
    AdmissionState s(cfg.classes, limit);
    std::vector<std::pair<int, uint64_t>> held;
    uint64_t id = 0;
    for (int step = 0; step < 20000; ++step) {
      if (!held.empty() && rng() % 3 == 0) {
        const size_t i = rng() % held.size();
        REQUIRE(s.Release(held[i].first, held[i].second));
        held.erase(held.begin() + static_cast<std::ptrdiff_t>(i));
      } else {
        const int onu = static_cast<int>(rng() % 32);
        const CircuitRecord r = Circuit(++id, onu, static_cast<int>(rng() % 3));
        if (s.Admit(r) == AdmissionDecision::kAdmitted) held.emplace_back(onu, id);
      }
      REQUIRE(s.beta() <= limit);
      double beta = 0.0;
      int onus_with = 0;
      std::vector<int> counts(3, 0);
      for (const auto& [onu, list] : s.per_onu()) {
        onus_with += !list.empty();
        for (const auto& c : list) {
          beta += c.rate;
          ++counts[c.cls];
        }
      }
      REQUIRE(beta == Approx(s.beta()).epsilon(1e-9));
      REQUIRE(onus_with == s.eta());
      REQUIRE(counts == s.counts());
    }
  }
}

TEST_CASE("circuit partition windows") {
  const ScenarioConfig cfg;
  AdmissionState s(cfg.classes, 2e9);
  CircuitPartition empty = BuildCircuitPartition(s, cfg);
  CHECK(empty.xi == 0.0);
  CHECK(empty.grants.empty());

  s.Admit(Circuit(1, 4, 0));
  const CircuitPartition one = BuildCircuitPartition(s, cfg);
  CHECK(one.xi == Approx(10.4e-6).epsilon(1e-12));
  REQUIRE(one.windows.size() == 1);
  CHECK(one.windows[0].duration == Approx(10.4e-6).epsilon(1e-12));

  // 2 Gb/s is not a sum of the default rates; use 250/500 Mb/s classes.
  const CircuitClassSet round({250e6, 500e6}, {0.5, 0.5});
  AdmissionState full(round, 2e9);
  uint64_t id = 0;
  for (int i = 0; i < 2; ++i) full.Admit(Circuit(++id, 9, 1));
  for (int i = 0; i < 2; ++i) full.Admit(Circuit(++id, 2, 0));
  for (int i = 0; i < 2; ++i) full.Admit(Circuit(++id, 30, 0));
  CHECK(full.beta() == Approx(2e9));
  const CircuitPartition p = BuildCircuitPartition(full, cfg);
  CHECK(p.xi == Approx(0.4e-3).epsilon(1e-12));
  CHECK(p.eta == 3);
  REQUIRE(p.grants.size() == 3);
  CHECK(p.grants[0].onu == 2);
  CHECK(p.grants[1].onu == 9);
  CHECK(p.grants[2].onu == 30);
  for (size_t i = 1; i < p.grants.size(); ++i) {
    CHECK(p.grants[i].start ==
          Approx(p.grants[i - 1].start + p.grants[i - 1].duration + cfg.guard_time));
  }
  // Windows of one ONU are contiguous in admission order.
  CHECK(p.windows[0].circuit_id == 3);
  CHECK(p.windows[1].start == Approx(p.windows[0].start + p.windows[0].duration));
}

TEST_CASE("circuits wait for their start cycle") {
  const ScenarioConfig cfg;
  AdmissionState s(cfg.classes, 2e9);
  s.Admit(Circuit(1, 0, 0, 5));
  CHECK(BuildCircuitPartition(s, cfg, 4).xi == 0.0);
  CHECK(BuildCircuitPartition(s, cfg, 5).xi > 0.0);
}

TEST_CASE("limited grants with proportional excess") {
  const ScenarioConfig cfg = Units(4);
  const std::vector<double> requests = {1, 1, 3, 5};
  const auto g = SizePacketGrants(requests, 8, cfg);
  CHECK(g == std::vector<double>{1, 1, 2.5, 3.5});
  CHECK(Sum(g) == Approx(8));
}

TEST_CASE("no contention leaves excess unallocated") {
  ScenarioConfig cfg;
  cfg.onus = 4;
  const double tr = cfg.report_time();
  const std::vector<double> requests = {0.0, 1e-6, 2e-5, 5e-5};
  const auto g = SizePacketGrants(requests, 1e-3, cfg);
  for (size_t j = 0; j < g.size(); ++j) CHECK(g[j] == std::max(requests[j], tr));
}

TEST_CASE("excess cap") {
  const ScenarioConfig cfg = Units(4);
  // Everyone over 2 G_max: no excess, each ONU gets G_max.
  CHECK(SizePacketGrants(std::vector<double>{9, 9, 9, 9}, 8, cfg) == std::vector<double>{2, 2, 2, 2});
  // One heavy ONU among idle ones: capped at 2 G_max.
  CHECK(SizePacketGrants(std::vector<double>{0, 0, 0, 10}, 8, cfg) == std::vector<double>{0, 0, 0, 4});
  // Factor 3 lifts the cap.
  ScenarioConfig wide = cfg;
  wide.excess_bound_factor = 3.0;
  CHECK(SizePacketGrants(std::vector<double>{0, 0, 0, 10}, 8, wide) == std::vector<double>{0, 0, 0, 6});
}

TEST_CASE("grant sizing requires room for the reports") {
  ScenarioConfig cfg;
  cfg.onus = 2;
  const std::vector<double> requests = {0, 0};
  CHECK_THROWS_AS(SizePacketGrants(requests, cfg.report_time() * 1.5, cfg), InfeasibleCycle);
}

TEST_CASE("property: grant sizing bounds") {
  std::mt19937_64 rng(5);
  ScenarioConfig cfg;
  std::exponential_distribution<double> demand(1.0 / 60e-6);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> requests(32);
    for (double& r : requests) r = (rng() % 4 == 0) ? 0.0 : demand(rng);
    const double gp = std::uniform_real_distribution<double>(0.2e-3, 1.8e-3)(rng);
    const auto g = SizePacketGrants(requests, gp, cfg);
    const double g_max = gp / 32;
    CHECK(Sum(g) <= gp * (1 + 1e-12));
    double floor_sum = 0.0;
    for (size_t j = 0; j < g.size(); ++j) {
      CHECK(g[j] >= cfg.report_time());
      CHECK(g[j] <= 2 * g_max * (1 + 1e-12));
      CHECK(g[j] <= std::max(requests[j], cfg.report_time()) * (1 + 1e-12));
      floor_sum += std::min(std::max(requests[j], cfg.report_time()), g_max);
    }
    CHECK(Sum(g) >= floor_sum * (1 - 1e-12));
  }
}

TEST_CASE("cycle with circuits masking the round trip") {
  const ScenarioConfig cfg;
  AdmissionState s(cfg.classes, 2e9);
  uint64_t id = 0;
  for (int i = 0; i < 2; ++i) s.Admit(Circuit(++id, 3, 2));
  for (int i = 0; i < 4; ++i) s.Admit(Circuit(++id, 8, 1));
  for (int i = 0; i < 2; ++i) s.Admit(Circuit(++id, 8, 0));
  const std::vector<double> requests(32, 20e-6);
  const CycleSchedule c = AssembleCycle(s, requests, cfg, 3);
  CHECK(c.xi == Approx(1.976e9 * cfg.cycle / cfg.channel_rate));
  CHECK(c.xi > 2 * cfg.propagation_delay);
  CHECK(c.packet_partition_start == Approx(c.xi + 2 * cfg.guard_time));
  CHECK(c.gp == Approx(cfg.cycle - c.xi - OverheadPerCycle(2, cfg)));
  CHECK(c.g_max == Approx(c.gp / 32));
}

TEST_CASE("cycle without circuits idles for the round trip") {
  const ScenarioConfig cfg;
  AdmissionState s(cfg.classes, 2e9);
  const std::vector<double> requests(32, 0.0);
  const CycleSchedule c = AssembleCycle(s, requests, cfg);
  CHECK(c.packet_partition_start == Approx(2 * cfg.propagation_delay));
  CHECK(c.gp == Approx(cfg.cycle - 2 * cfg.propagation_delay - OverheadPerCycle(0, cfg)));
  REQUIRE(c.packet_grants.size() == 32);
  for (const Grant& g : c.packet_grants) CHECK(g.duration == cfg.report_time());
}

TEST_CASE("cycle assembly errors") {
  ScenarioConfig cfg;
  AdmissionState s(cfg.classes, 2e9);
  CHECK_THROWS_AS(AssembleCycle(s, std::vector<double>(31, 0.0), cfg), InvalidArgument);
  cfg.cycle = 0.3e-3;
  CHECK_THROWS_AS(AssembleCycle(s, std::vector<double>(32, 0.0), cfg), InfeasibleCycle);
}

TEST_CASE("property: assembled cycles are feasible and deterministic") {
  const ScenarioConfig cfg;
  std::mt19937_64 rng(11);
  std::exponential_distribution<double> demand(1.0 / 80e-6);
  for (int trial = 0; trial < 300; ++trial) {
    AdmissionState s(cfg.classes, trial % 2 ? 4e9 : 2e9);
    const int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      s.Admit(Circuit(static_cast<uint64_t>(i + 1), static_cast<int>(rng() % 32),
                      static_cast<int>(rng() % 3)));
    }
    std::vector<double> requests(32);
    for (double& r : requests) r = demand(rng);
    const CycleSchedule c = AssembleCycle(s, requests, cfg, trial);
    CHECK(c == AssembleCycle(s, requests, cfg, trial));
    CHECK(c.xi == Approx(s.beta() * cfg.cycle / cfg.channel_rate).epsilon(1e-9));

    std::vector<Grant> all = c.circuit_grants;
    all.insert(all.end(), c.packet_grants.begin(), c.packet_grants.end());
    for (size_t i = 1; i < all.size(); ++i) {
      CHECK(all[i].start >= all[i - 1].start + all[i - 1].duration + cfg.guard_time - 1e-15);
    }
    for (size_t i = 1; i < c.packet_grants.size(); ++i) {
      CHECK(c.packet_grants[i].start ==
            Approx(c.packet_grants[i - 1].start + c.packet_grants[i - 1].duration + cfg.guard_time)
                .epsilon(1e-12));
    }
    if (!c.circuit_grants.empty()) {
      const Grant& last = c.circuit_grants.back();
      CHECK(c.packet_partition_start >= last.start + last.duration + cfg.guard_time - 1e-15);
    }
    const Grant& end = c.packet_grants.back();
    CHECK(end.start + end.duration + cfg.guard_time <= cfg.cycle + 1e-15);
    for (const Grant& g : c.packet_grants) CHECK(g.duration >= cfg.report_time());
  }
}

TEST_CASE("low traffic polling trigger") {
  const ScenarioConfig cfg;
  const double threshold = 32 * (cfg.report_time() + cfg.guard_time) + 2 * cfg.propagation_delay;
  CHECK(threshold == Approx(353.6384e-6).epsilon(1e-12));
  CHECK_FALSE(LowTrafficPollCheck(0.0, threshold, cfg));
  CHECK(LowTrafficPollCheck(0.0, 1.0e-3, cfg));
  CHECK_FALSE(LowTrafficPollCheck(0.0, 0.3e-3, cfg));
  CHECK(LowTrafficPollCheck(1.0, 1.0 + 0.36e-3, cfg));
}
