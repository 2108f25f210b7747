#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "train/crypto.hpp"
#include "train/messages.hpp"
#include "train/types.hpp"

namespace train {

struct TimingParams {
  std::uint64_t n = 0;
  Micros t_request = 0;
  Micros t_hash = 0;
  Micros t_report = 0;
  Micros t_mac = 0;
  Micros t_slack = 0;
  std::uint32_t height_net = 0;
};

/// n * (t_request + t_hash + t_report) + t_mac + t_slack
Micros compute_timeout(const TimingParams& p);

/// height_net * (t_request + t_hash) + t_slack + now
Micros compute_attest_time(const TimingParams& p, Micros now);

enum class VerifierState : std::uint8_t { Idle, Initiate, Collect, Tally };
std::string_view to_string(VerifierState s);

struct TallySets {
  std::vector<NodeId> attest;
  std::vector<NodeId> fail;
  std::vector<NodeId> norep;

  friend bool operator==(const TallySets&, const TallySets&) = default;
};

enum class ReportVerdict : std::uint8_t {
  Attest,
  FailLmt,
  FailTiming,
  DiscardNotCollecting,
  DiscardHash,
  DiscardUnknown,
  DiscardMac,
  Duplicate,
};
std::string_view to_string(ReportVerdict v);
bool is_accepted(ReportVerdict v);

struct DeviceRecord {
  DeviceKey key;
  std::optional<Hash> lmt;  // stored LMT for RATA devices
  std::uint32_t height = 0;  // spanning-tree height, for the clockless timing check
};

enum class RenewalStatus : std::uint8_t { None, Announced, Pending, Confirmed, Deferred };
std::string_view to_string(RenewalStatus s);

struct PendingInstance {
  Hash hash_new;
  std::uint32_t hash_ind_new = 0;
  Micros t_attest = 0;
  Micros t_timeout = 0;
};

class Verifier {
 public:
  /// sync_tolerance bounds |t_attest' - expected| for a report to count.
  Verifier(HashChain chain, Variant variant, TimingParams timing, Micros sync_tolerance);

  void register_device(NodeId id, DeviceRecord record);
  std::size_t device_count() const { return device_count_; }

  VerifierState state() const { return state_; }
  const HashChain& chain() const { return chain_; }
  /// Index revealed by the next initiate(); negative once the chain is spent.
  std::int64_t next_index() const { return next_index_; }
  const TimingParams& timing() const { return timing_; }
  const std::optional<PendingInstance>& pending() const { return pending_; }

  /// Throws ChainDepleted when no link is left to reveal.
  AttRequest initiate(Micros now);

  ReportVerdict on_report(const AttReport& rep, Micros now);

  /// All registered devices have a verdict.
  bool complete() const { return state_ == VerifierState::Collect && outstanding_ == 0; }

  TallySets tally(Micros now);

  /// Schedules a chain hand-off with margin k. The payload rides on the next
  /// request; the key link is revealed k + 1 instances later. Throws
  /// ChainDepleted when fewer than k + 2 links remain.
  void plan_renewal(HashChain new_chain, std::uint32_t k);
  bool renewal_planned() const { return plan_.has_value(); }
  /// Status of the renewal after the most recent tally.
  RenewalStatus renewal_status() const { return renewal_status_; }

 private:
  enum class Status : std::uint8_t { Unregistered, NoRep, Attest, Fail };

  struct Plan {
    HashChain new_chain;
    std::uint32_t k = 0;
    bool announced = false;
    std::uint32_t key_index = 0;
    bool clean = true;
  };

  Micros expected_attest_prime(const DeviceRecord& dev) const;

  HashChain chain_;
  Variant variant_;
  TimingParams timing_;
  Micros sync_tolerance_;
  std::int64_t next_index_;

  std::vector<std::optional<DeviceRecord>> registry_;
  std::size_t device_count_ = 0;
  std::vector<Status> status_;
  std::size_t outstanding_ = 0;

  VerifierState state_ = VerifierState::Idle;
  std::optional<PendingInstance> pending_;
  std::optional<Plan> plan_;
  RenewalStatus renewal_status_ = RenewalStatus::None;
};

}  // namespace train
