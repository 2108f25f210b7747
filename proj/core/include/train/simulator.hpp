#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "train/adversary.hpp"
#include "train/prover.hpp"
#include "train/topology.hpp"
#include "train/trace.hpp"
#include "train/verifier.hpp"

namespace train {

enum class Queueing : std::uint8_t { None, Fifo };
std::string_view to_string(Queueing q);

/// Per-hop frame delay: transmission at bandwidth_bps (0 = unlimited), plus
/// latency, plus uniform jitter in [-jitter_us, +jitter_us].
struct LinkModel {
  std::uint64_t bandwidth_bps = 250'000;
  Micros latency_us = 100;
  Micros jitter_us = 0;
  Queueing queueing = Queueing::None;

  Micros transmission(std::size_t bytes) const;
};

/// How per-node clock errors are drawn. Ranges are inclusive.
struct ClockDistribution {
  enum class Kind : std::uint8_t { Exact, RtcOffset, Drift };
  Kind kind = Kind::Exact;
  Micros offset_lo = 0;
  Micros offset_hi = 0;
  double ppm_lo = 0.0;
  double ppm_hi = 0.0;
};

struct Scenario {
  Variant variant = Variant::A;
  TopologySpec topology;
  std::vector<NodeId> parents;  // non-empty overrides `topology` with a custom tree
  TimingParams timing{0, 2'000, 13'000, 4'000, 29'500, 300'000, 0};
  std::optional<std::uint32_t> height_net;  // defaults to the topology's height
  ClockDistribution clock;
  Backend backend = Backend::Casu;
  std::vector<NodeId> compromised;
  AdversaryScript adversary;
  std::uint32_t instances = 1;
  std::uint32_t chain_m = 1024;
  std::uint32_t renewal_k = 2;
  bool renewal = true;
  std::uint64_t seed = 1;
  LinkModel link;
  ForwardTimerMode forward_mode = ForwardTimerMode::MaxDelay;
  std::optional<Micros> sync_tolerance;  // defaults to t_slack
  std::optional<Micros> t_max_delay;     // defaults to n * t_report
  bool record_events = false;
};

/// Deterministic key material derived from the scenario seed.
DeviceKey derive_device_key(std::uint64_t seed, NodeId id);
Hash derive_lmt(std::uint64_t seed, NodeId id);
Hash derive_chain_root(std::uint64_t seed);
Hash derive_successor_root(const Hash& old_root, std::uint32_t counter);

/// Executes a scenario. Construction validates it (ConfigError) and builds the
/// topology, the verifier and every prover; run() may be called once.
class Simulator {
 public:
  explicit Simulator(const Scenario& scenario);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  /// Throws ChainDepleted if the scenario asks for more instances than the
  /// chain (and its renewals) can serve.
  EventTrace run();

  const Topology& topology() const;
  const Verifier& verifier() const;
  const ProverNode& prover(NodeId id) const;
  const TimingParams& timing() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

EventTrace run(const Scenario& scenario);

}  // namespace train
