#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "train/simulator.hpp"
#include "train/trace.hpp"

namespace train {

struct InstanceMetrics {
  std::uint32_t instance = 0;
  Micros toctou_sa_us = 0;
  Micros total_runtime_us = 0;
  Micros strawman_toctou_us = 0;
  TallySets tally;
  std::vector<std::pair<NodeId, Micros>> per_node_attest_times;  // true time
};

/// Spread between the earliest and latest true attestation instant over
/// benign provers. Throws AnalysisError for an instance that never tallied.
Micros toctou_sa(const InstanceRecord& inst);

/// Tally time minus initiate time. Throws AnalysisError if never tallied.
Micros total_runtime(const InstanceRecord& inst);

/// TOCTOU of a schedule where every prover attests the moment it accepts the
/// request, computed from the same acceptance instants.
Micros strawman_toctou(const InstanceRecord& inst, const std::vector<NodeId>& compromised = {});

InstanceMetrics instance_metrics(const InstanceRecord& inst);

struct SweepAxis {
  enum class Kind : std::uint8_t { N, Topology };
  Kind kind = Kind::N;
  std::vector<std::uint32_t> n_values;
  std::vector<TopologySpec> topologies;  // n is taken from the base scenario

  /// "n=10,100" or "topo=star,line,tree:2". Duplicates are dropped, first
  /// occurrence wins. Throws InvalidParameter on malformed input.
  static SweepAxis parse(std::string_view text);
  std::size_t size() const;
};

struct SweepRow {
  std::string kind;
  std::uint32_t d = 0;
  std::uint32_t n = 0;
  std::uint32_t height_net = 0;
  Micros total_runtime_us = 0;
  Micros toctou_sa_us = 0;
  std::size_t attest = 0;
  std::size_t fail = 0;
  std::size_t norep = 0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// One single-instance run per axis point. Points may run concurrently on up
/// to `threads` workers (0 = hardware concurrency); rows come back in axis order.
std::vector<SweepRow> sweep(const Scenario& base, const SweepAxis& axis, unsigned threads = 0);

SweepRow sweep_point(const Scenario& scenario);

inline constexpr std::string_view kCsvHeader =
    "kind,d,n,height_net,total_runtime_us,toctou_sa_us,attest,fail,norep";
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace train
