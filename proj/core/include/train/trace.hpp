#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string_view>
#include <vector>

#include "train/types.hpp"
#include "train/verifier.hpp"

namespace train {

inline constexpr Micros kNoTime = std::numeric_limits<Micros>::min();

enum class EventKind : std::uint8_t {
  Initiate = 1,
  Send,
  Deliver,
  AdvDrop,
  AdvDelay,
  AdvModify,
  AdvReplay,
  AdvInject,
  Undeliverable,
  AttestTimer,
  ForwardTimer,
  Timeout,
  Tally,
  Malformed,
};
std::string_view to_string(EventKind k);

/// One timestamped simulator step. state_before/after hold the node's state
/// enum value (prover or verifier); detail holds the verdict of that step.
struct EventRecord {
  Micros time = 0;
  NodeId node = 0;
  NodeId peer = 0;
  EventKind kind = EventKind::Send;
  std::uint8_t state_before = 0;
  std::uint8_t state_after = 0;
  std::uint8_t detail = 0;
  Micros t_attest_prime = kNoTime;
  std::shared_ptr<const Bytes> message;

  bool operator==(const EventRecord& o) const;
};

struct AcceptRecord {
  NodeId id = 0;
  Micros time = 0;
};

struct AttestRecord {
  NodeId id = 0;
  Micros t_attest_prime = 0;
  Micros true_time = 0;
  bool benign = true;
};

struct InstanceRecord {
  std::uint32_t index = 0;
  std::uint32_t hash_ind = 0;
  std::uint32_t height_net = 0;
  Micros initiated_at = 0;
  Micros t_attest = 0;
  Micros timeout_at = 0;
  Micros tallied_at = kNoTime;
  TallySets tally;
  RenewalStatus renewal = RenewalStatus::None;
  std::vector<AcceptRecord> accepts;
  std::vector<AttestRecord> attests;

  bool completed() const { return tallied_at != kNoTime; }
};

struct EventTrace {
  std::vector<InstanceRecord> instances;
  std::vector<EventRecord> events;  // empty unless full recording was requested
};

/// Record body: time i64 | node u32 | peer u32 | kind u8 | before u8 |
/// after u8 | detail u8 | t_attest_prime i64 | message bytes. Each body is
/// preceded by its u32 length. All integers big-endian.
Bytes encode_record(const EventRecord& r);
void write_trace(std::ostream& out, const EventTrace& trace);
/// Throws MalformedMessage on a truncated or inconsistent stream.
std::vector<EventRecord> read_trace(std::istream& in);

/// Per-node attestation times as JSON.
void write_sidecar(std::ostream& out, const EventTrace& trace);

}  // namespace train
