#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "train/metrics.hpp"
#include "train/simulator.hpp"

using namespace train;

namespace {

Scenario small(TopologyKind kind, std::uint32_t n, Variant v = Variant::A) {
  Scenario s;
  s.variant = v;
  s.topology = {kind, n, 2};
  s.timing.t_slack = 5000;
  s.chain_m = 32;
  return s;
}

std::vector<NodeId> ids(std::initializer_list<NodeId> l) { return l; }

}  // namespace

TEST_CASE("star of three attests in lockstep") {
  auto trace = run(small(TopologyKind::Star, 3));
  REQUIRE(trace.instances.size() == 1);
  const auto& inst = trace.instances[0];
  CHECK(inst.completed());
  CHECK(inst.tally.attest == ids({1, 2, 3}));
  CHECK(inst.attests.size() == 3);
  for (const auto& a : inst.attests) {
    CHECK(a.t_attest_prime == inst.t_attest);
    CHECK(a.true_time == inst.t_attest);
  }
  CHECK(toctou_sa(inst) == 0);
  // All reports in before the timeout: the tally is early.
  CHECK(inst.tallied_at < inst.timeout_at);
}

TEST_CASE("line with the tail report dropped") {
  Scenario s = small(TopologyKind::Line, 3);
  AdversaryRule drop;
  drop.match.type = MessageFilter::Report;
  drop.match.id_dev = 3;
  s.adversary.rules.push_back(drop);
  auto trace = run(s);
  const auto& inst = trace.instances[0];
  CHECK(inst.tally.attest == ids({1, 2}));
  CHECK(inst.tally.norep == ids({3}));
  CHECK(inst.tallied_at == inst.timeout_at);
}

TEST_CASE("variant B line waits scale with depth") {
  Scenario s = small(TopologyKind::Line, 4, Variant::B);
  s.link.bandwidth_bps = 0;
  s.link.latency_us = s.timing.t_request;
  auto trace = run(s);
  const auto& inst = trace.instances[0];
  CHECK(inst.tally.attest.size() == 4);
  CHECK(toctou_sa(inst) == 0);
}

TEST_CASE("compromised device fails under RATA") {
  Scenario s = small(TopologyKind::Star, 4);
  s.backend = Backend::Rata;
  s.compromised = {2};
  auto trace = run(s);
  const auto& inst = trace.instances[0];
  CHECK(inst.tally.attest == ids({1, 3, 4}));
  CHECK(inst.tally.fail == ids({2}));
}

TEST_CASE("compromise is invisible under CASU") {
  Scenario s = small(TopologyKind::Line, 3);
  s.compromised = {2};
  auto trace = run(s);
  const auto& inst = trace.instances[0];
  CHECK(inst.tally.attest == ids({1, 2, 3}));
  CHECK(inst.attests.size() == 3);
  CHECK_FALSE(inst.attests[1].benign);
}

TEST_CASE("several instances consume the chain") {
  Scenario s = small(TopologyKind::Star, 2);
  s.instances = 5;
  Simulator sim(s);
  auto trace = sim.run();
  REQUIRE(trace.instances.size() == 5);
  for (std::uint32_t i = 0; i < 5; ++i) {
    CHECK(trace.instances[i].hash_ind == 31 - i);
    CHECK(trace.instances[i].tally.attest.size() == 2);
    CHECK(trace.instances[i].initiated_at >= (i ? trace.instances[i - 1].tallied_at : 0));
  }
  CHECK(sim.prover(1).position().ind_cur == 27);
  CHECK_THROWS_AS(sim.run(), InvalidParameter);
}

TEST_CASE("renewal keeps a long run alive") {
  Scenario s = small(TopologyKind::Line, 3);
  s.chain_m = 8;
  s.renewal_k = 1;
  s.instances = 20;
  auto trace = run(s);
  REQUIRE(trace.instances.size() == 20);
  bool confirmed = false;
  for (const auto& inst : trace.instances) {
    CHECK(inst.tally.attest.size() == 3);
    confirmed = confirmed || inst.renewal == RenewalStatus::Confirmed;
  }
  CHECK(confirmed);
}

TEST_CASE("depletion without renewal") {
  Scenario s = small(TopologyKind::Star, 2);
  s.chain_m = 3;
  s.renewal = false;
  s.instances = 3;
  CHECK_THROWS_AS(run(s), ChainDepleted);
}

TEST_CASE("configuration errors") {
  Scenario s = small(TopologyKind::Tree, 10);
  s.topology.degree = 20;
  CHECK_THROWS_AS(Simulator{s}, ConfigError);
  s = small(TopologyKind::Star, 3);
  s.compromised = {9};
  CHECK_THROWS_AS(Simulator{s}, ConfigError);
  s = small(TopologyKind::Star, 3);
  s.chain_m = 0;
  CHECK_THROWS_AS(Simulator{s}, ConfigError);
}

TEST_CASE("link model") {
  LinkModel l;
  CHECK(l.transmission(50) == 1600);
  CHECK(l.transmission(1) == 32);
  l.bandwidth_bps = 3;
  CHECK(l.transmission(1) == 2'666'667);
  l.bandwidth_bps = 0;
  CHECK(l.transmission(1000) == 0);
}

TEST_CASE("events are recorded only on request") {
  Scenario s = small(TopologyKind::Tree, 7);
  CHECK(run(s).events.empty());
  s.record_events = true;
  auto trace = run(s);
  CHECK_FALSE(trace.events.empty());
  CHECK(trace.events.front().kind == EventKind::Initiate);
  CHECK(std::count_if(trace.events.begin(), trace.events.end(),
                      [](const EventRecord& e) { return e.kind == EventKind::Tally; }) == 1);
  for (std::size_t i = 1; i < trace.events.size(); ++i) {
    CHECK(trace.events[i - 1].time <= trace.events[i].time);
  }
}

TEST_CASE("runs are deterministic") {
  Scenario s = small(TopologyKind::Tree, 30);
  s.clock.kind = ClockDistribution::Kind::Drift;
  s.clock.ppm_lo = -100;
  s.clock.ppm_hi = 100;
  s.link.jitter_us = 50;
  s.record_events = true;
  s.instances = 3;
  std::ostringstream a, b;
  write_trace(a, run(s));
  write_trace(b, run(s));
  CHECK(a.str() == b.str());
  s.seed = 2;
  std::ostringstream c;
  write_trace(c, run(s));
  CHECK(a.str() != c.str());
}

TEST_CASE("derived material depends on seed and id") {
  CHECK(derive_device_key(1, 1).key != derive_device_key(1, 2).key);
  CHECK(derive_device_key(1, 1).key != derive_device_key(2, 1).key);
  CHECK(derive_lmt(1, 1) != derive_device_key(1, 1).key);
  CHECK(derive_successor_root(derive_chain_root(1), 1) != derive_successor_root(derive_chain_root(1), 2));
}
