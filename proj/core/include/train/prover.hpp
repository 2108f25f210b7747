#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "train/crypto.hpp"
#include "train/messages.hpp"
#include "train/types.hpp"

namespace train {

enum class ProverState : std::uint8_t { Idle, Verify, AttestWait, Attest, ForwardWait };
std::string_view to_string(ProverState s);

/// Per-device time source. The RTC reading is true time plus a fixed offset;
/// the secure timer counts elapsed time scaled by (1 + drift_ppm * 1e-6).
struct ClockModel {
  Micros rtc_offset = 0;
  double drift_ppm = 0.0;

  Micros rtc_read(Micros true_now) const { return true_now + rtc_offset; }
  /// True time needed for the secure timer to advance by `reading`.
  Micros true_duration(Micros reading) const;
  /// Secure timer advance over `true_elapsed` of true time.
  Micros timer_reading(Micros true_elapsed) const;
};

enum class ForwardTimerMode : std::uint8_t { MaxDelay, HeightScaled };

enum class TimerKind : std::uint8_t { Attest, Forward };

struct BroadcastAction {
  AttRequest request;
  Micros processing = 0;  // charged before the frame leaves the node
};

struct UnicastAction {
  NodeId to = 0;
  AttReport report;
  Micros processing = 0;
};

/// fire_at is in true simulation time; the prover converts through its clock.
struct SetTimerAction {
  TimerKind timer = TimerKind::Attest;
  Micros fire_at = 0;
  std::uint32_t generation = 0;
};

using ProverAction = std::variant<BroadcastAction, UnicastAction, SetTimerAction>;

/// Why the last input was consumed the way it was.
enum class ProverVerdict : std::uint8_t {
  Accepted,
  AcceptedRenewalSwitch,
  AcceptedFallback,
  RenewalFailed,
  DiscardBusy,
  DiscardIndex,
  DiscardLate,
  DiscardChain,
  Forwarded,
  DiscardReport,
  TimerFired,
  TimerStale,
};
std::string_view to_string(ProverVerdict v);

enum class RenewalOutcome : std::uint8_t { NotSwitched, Switched, Failed };

struct ProverConfig {
  NodeId id = 1;
  DeviceKey key;
  Backend backend = Backend::Casu;
  Hash lmt;  // the value the RATA hardware would log for benign software
  bool compromised = false;
  ClockModel clock;
  ChainPosition position;   // anchor installed at deployment
  std::uint32_t chain_m = 0;  // length of successor chains
  Micros t_hash = 0;
  Micros t_mac = 0;
  Micros t_request = 0;
  Micros t_report = 0;
  Micros t_max_delay = 0;
  ForwardTimerMode forward_mode = ForwardTimerMode::MaxDelay;
};

class ProverNode {
 public:
  explicit ProverNode(ProverConfig config);

  NodeId id() const { return cfg_.id; }
  ProverState state() const { return state_; }
  const ChainPosition& position() const { return position_; }
  NodeId parent() const { return id_par_; }
  bool compromised() const { return cfg_.compromised; }
  bool renewal_failed() const { return renewal_failed_; }
  const std::optional<RenewalPayload>& pending_renewal() const { return pending_; }
  const std::optional<ChainPosition>& fallback() const { return fallback_; }
  ProverVerdict last_verdict() const { return verdict_; }

  /// Dispatches on req.variant. `now` is true simulation time.
  std::vector<ProverAction> on_request(const AttRequest& req, Micros now);
  std::vector<ProverAction> handle_request_A(const AttRequest& req, Micros now);
  std::vector<ProverAction> handle_request_B(const AttRequest& req, Micros now);

  std::vector<ProverAction> on_attest_timer(Micros now, std::uint32_t generation);
  std::vector<ProverAction> on_report(const AttReport& rep);
  std::vector<ProverAction> on_forward_timer(std::uint32_t generation);

  /// Checks the stored payload against a link that has just been authenticated.
  RenewalOutcome apply_pending_renewal(const Hash& revealed_link);

  /// The LMT this device puts into reports (diverges when compromised).
  std::optional<Hash> reported_lmt() const;

 private:
  enum class Admission { Rejected, Normal, Withhold };

  Admission admit(const AttRequest& req, Micros now);
  std::vector<ProverAction> finish_accept(AttRequest fwd, Micros fire_at, Admission admission,
                                          Micros now);
  Micros forward_duration() const;

  ProverConfig cfg_;
  ProverState state_ = ProverState::Idle;
  ChainPosition position_;
  std::optional<ChainPosition> fallback_;
  std::optional<RenewalPayload> pending_;
  std::uint32_t pending_key_index_ = 0;
  bool renewal_failed_ = false;

  NodeId id_par_ = kVerifierId;
  Hash instance_hash_;
  Micros armed_at_ = 0;
  bool rtc_mode_ = true;
  std::uint32_t own_height_ = 0;
  std::uint32_t attest_gen_ = 0;
  std::uint32_t forward_gen_ = 0;
  ProverVerdict verdict_ = ProverVerdict::TimerStale;
};

}  // namespace train
