#include <cmath>

#include "cpon/analysis.h"
#include "cpon/error.h"
#include "cpon/simulator.h"
#include "doctest.h"

using namespace cpon;
using doctest::Approx;

namespace {

ScenarioConfig Loaded(double chi, double pi, double circuit_limit = 2e9, double holding = 0.5) {
  ScenarioConfig c;
  c.circuit_limit = circuit_limit;
  c.SetMeanHoldingTime(holding);
  c.SetLoads(chi, pi);
  return c;
}

void Enqueue(OnuState& onu, double bytes, double arrival = 0.0) {
  onu.queue.push_back({arrival, bytes * 8, true});
  onu.queued_bits += bytes * 8;
  ++onu.arrived;
}

}  // namespace

TEST_CASE("grant that fits three packets exactly") {
  const ScenarioConfig cfg;
  OnuState onu;
  for (int i = 0; i < 3; ++i) Enqueue(onu, 1518);
  Enqueue(onu, 64);
  const double grant = cfg.report_time() + 3 * 1518 * 8 / cfg.channel_rate;
  const auto done = ServePacketGrant(onu, grant, 1.0, cfg);
  REQUIRE(done.size() == 3);
  CHECK(onu.queue.size() == 1);
  CHECK(onu.reported_backlog == 64 * 8);
  const double start = 1.0 + cfg.propagation_delay + cfg.report_time();
  CHECK(done[0].delivery == Approx(start + 1518 * 8 / cfg.channel_rate).epsilon(1e-15));
  CHECK(done[2].delivery == Approx(1.0 + cfg.propagation_delay + grant).epsilon(1e-15));
}

TEST_CASE("packets are not fragmented") {
  const ScenarioConfig cfg;
  OnuState onu;
  Enqueue(onu, 1518);
  const double grant = cfg.report_time() + 500 * 8 / cfg.channel_rate;
  CHECK(ServePacketGrant(onu, grant, 0.0, cfg).empty());
  CHECK(onu.queue.size() == 1);
  CHECK(onu.reported_backlog == 1518 * 8);
}

TEST_CASE("report-only grant on an empty queue") {
  const ScenarioConfig cfg;
  OnuState onu;
  CHECK(ServePacketGrant(onu, cfg.report_time(), 0.0, cfg).empty());
  CHECK(onu.reported_backlog == 0.0);
}

TEST_CASE("empty system") {
  const ScenarioConfig cfg;
  SimOptions o;
  o.duration = 0.5;
  o.record_xi_trace = true;
  const SimMetrics m = Run(cfg, 1, o);
  for (int k = 0; k < 3; ++k) CHECK(m.offered[k] == 0);
  CHECK(m.delay.count() == 0);
  CHECK_FALSE(m.xi_trace.empty());
  for (double xi : m.xi_trace) CHECK(xi == 0.0);
  CHECK_FALSE(m.unstable);
}

TEST_CASE("run preconditions") {
  ScenarioConfig cfg;
  CHECK_THROWS_AS(Run(cfg, 1, 1.0, 1.0), InvalidArgument);
  cfg.cycle = 0.3e-3;
  CHECK_THROWS_AS(Run(cfg, 1, 1.0), InfeasibleCycle);
}

TEST_CASE("counts, conservation and cycle integrity") {
  const ScenarioConfig cfg = Loaded(0.4, 0.5, 2e9, 0.05);
  SimOptions o;
  o.duration = 4.0;
  o.record_xi_trace = true;
  const SimMetrics m = Run(cfg, 3, o);
  for (int k = 0; k < 3; ++k) {
    CHECK(m.offered[k] == m.admitted[k] + m.blocked[k]);
    CHECK(m.offered[k] > 0);
  }
  for (int j = 0; j < cfg.onus; ++j) {
    CHECK(m.onu_arrived[j] == m.onu_delivered[j] + m.onu_queued[j]);
  }
  CHECK(m.warmup == Approx(0.4));
  CHECK(m.cycles == 1800);
  REQUIRE(m.xi_trace.size() == 1800);
  const double unit = 52e6 * cfg.cycle / cfg.channel_rate;
  for (double xi : m.xi_trace) {
    CHECK(xi <= 2e9 * cfg.cycle / cfg.channel_rate * (1 + 1e-12));
    CHECK(xi / unit == Approx(std::round(xi / unit)).epsilon(1e-9));
  }
  CHECK(m.offered_packet_load == Approx(0.5).epsilon(0.02));
  CHECK(m.delay.count() > 0);
  CHECK(m.delay.mean() > cfg.propagation_delay);
  CHECK_FALSE(m.unstable);
}

TEST_CASE("identical seeds replay identically") {
  const ScenarioConfig cfg = Loaded(0.4, 0.6);
  const SimMetrics a = Run(cfg, 77, 1.0);
  const SimMetrics b = Run(cfg, 77, 1.0);
  const SimMetrics c = Run(cfg, 78, 1.0);
  CHECK(a.offered == b.offered);
  CHECK(a.blocked == b.blocked);
  CHECK(a.delay.count() == b.delay.count());
  CHECK(a.delay.mean() == b.delay.mean());
  CHECK(a.delay.variance() == b.delay.variance());
  CHECK(a.beta_bar == b.beta_bar);
  CHECK(a.onu_queued == b.onu_queued);
  CHECK(a.delay.mean() != c.delay.mean());
}

TEST_CASE("circuit chunks arrive one circuit delay after generation") {
  const ScenarioConfig cfg = Loaded(0.4, 0.3, 2e9, 0.05);
  const SimMetrics m = Run(cfg, 5, 3.0);
  for (int k = 0; k < 3; ++k) {
    REQUIRE(m.chunk_windows[k] > 0);
    const double expected = CircuitDelay(cfg.classes.rate(k), cfg);
    CHECK(m.chunk_delay_min[k] == Approx(expected).epsilon(1e-9));
    CHECK(m.chunk_delay_max[k] == Approx(expected).epsilon(1e-9));
    CHECK(m.max_payload_jitter[k] <= JitterBound(cfg.classes.rate(k), cfg) * (1 + 1e-9));
  }
}

TEST_CASE("low traffic polling adds rounds only when enabled") {
  ScenarioConfig cfg = Loaded(0.4, 0.05);
  const SimMetrics off = Run(cfg, 2, 1.0);
  CHECK(off.low_traffic_rounds == 0);
  cfg.low_traffic_polling = true;
  const SimMetrics on = Run(cfg, 2, 1.0);
  CHECK(on.low_traffic_rounds > 0);
  CHECK(on.delay.mean() < off.delay.mean());
  for (int j = 0; j < cfg.onus; ++j) {
    CHECK(on.onu_arrived[j] == on.onu_delivered[j] + on.onu_queued[j]);
  }
}

TEST_CASE("overload trips the unstable advisory") {
  const ScenarioConfig cfg = Loaded(0.4, 0.95);
  const SimMetrics m = Run(cfg, 4, 3.0);
  CHECK(m.unstable);
  CHECK(m.final_backlog_packets > m.backlog_limit);
}
