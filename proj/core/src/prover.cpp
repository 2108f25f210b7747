#include "train/prover.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace train {

std::string_view to_string(ProverState s) {
  switch (s) {
    case ProverState::Idle:
      return "Idle";
    case ProverState::Verify:
      return "Verify";
    case ProverState::AttestWait:
      return "AttestWait";
    case ProverState::Attest:
      return "Attest";
    case ProverState::ForwardWait:
      return "ForwardWait";
  }
  return "?";
}

std::string_view to_string(ProverVerdict v) {
  switch (v) {
    case ProverVerdict::Accepted:
      return "accepted";
    case ProverVerdict::AcceptedRenewalSwitch:
      return "accepted-switch";
    case ProverVerdict::AcceptedFallback:
      return "accepted-fallback";
    case ProverVerdict::RenewalFailed:
      return "renewal-failed";
    case ProverVerdict::DiscardBusy:
      return "discard-busy";
    case ProverVerdict::DiscardIndex:
      return "discard-index";
    case ProverVerdict::DiscardLate:
      return "discard-late";
    case ProverVerdict::DiscardChain:
      return "discard-chain";
    case ProverVerdict::Forwarded:
      return "forwarded";
    case ProverVerdict::DiscardReport:
      return "discard-report";
    case ProverVerdict::TimerFired:
      return "timer-fired";
    case ProverVerdict::TimerStale:
      return "timer-stale";
  }
  return "?";
}

Micros ClockModel::true_duration(Micros reading) const {
  return static_cast<Micros>(std::llround(static_cast<double>(reading) / (1.0 + drift_ppm * 1e-6)));
}

Micros ClockModel::timer_reading(Micros true_elapsed) const {
  return static_cast<Micros>(
      std::llround(static_cast<double>(true_elapsed) * (1.0 + drift_ppm * 1e-6)));
}

ProverNode::ProverNode(ProverConfig config) : cfg_(std::move(config)), position_(cfg_.position) {
  if (cfg_.chain_m == 0) cfg_.chain_m = cfg_.position.ind_cur;
}

std::optional<Hash> ProverNode::reported_lmt() const {
  if (cfg_.backend != Backend::Rata) return std::nullopt;
  if (!cfg_.compromised) return cfg_.lmt;
  static constexpr std::string_view kTag = "compromised";
  Bytes tampered(cfg_.lmt.bytes.begin(), cfg_.lmt.bytes.end());
  tampered.insert(tampered.end(), kTag.begin(), kTag.end());
  return crypto::sha256(tampered);
}

RenewalOutcome ProverNode::apply_pending_renewal(const Hash& revealed_link) {
  if (!pending_) return RenewalOutcome::NotSwitched;
  const bool ok = verify_renewal(*pending_, revealed_link);
  const Hash anchor = pending_->new_chain_anchor;
  pending_.reset();
  if (!ok) {
    renewal_failed_ = true;
    return RenewalOutcome::Failed;
  }
  fallback_ = position_;
  position_ = ChainPosition{anchor, cfg_.chain_m};
  return RenewalOutcome::Switched;
}

ProverNode::Admission ProverNode::admit(const AttRequest& req, Micros now) {
  if (state_ != ProverState::Idle) {
    verdict_ = ProverVerdict::DiscardBusy;
    return Admission::Rejected;
  }
  state_ = ProverState::Verify;
  const auto reject = [&](ProverVerdict v) {
    verdict_ = v;
    state_ = ProverState::Idle;
    return Admission::Rejected;
  };

  if (req.variant == Variant::A && cfg_.clock.rtc_read(now) >= req.t_attest) {
    return reject(ProverVerdict::DiscardLate);
  }

  const std::uint32_t idx = req.hash_ind_new;
  verdict_ = ProverVerdict::Accepted;
  if (verify_link(req.hash_new, idx, position_)) {
    fallback_.reset();
  } else if (fallback_ && verify_link(req.hash_new, idx, *fallback_)) {
    // The verifier kept the old chain; drop the provisional switch.
    fallback_.reset();
    verdict_ = ProverVerdict::AcceptedFallback;
  } else {
    return reject(idx >= position_.ind_cur ? ProverVerdict::DiscardIndex
                                           : ProverVerdict::DiscardChain);
  }
  position_ = ChainPosition{req.hash_new, idx};

  if (pending_ && idx <= pending_key_index_) {
    const Hash key = crypto::hash_iterate(req.hash_new, pending_key_index_ - idx);
    if (apply_pending_renewal(key) == RenewalOutcome::Failed) {
      verdict_ = ProverVerdict::RenewalFailed;
      return Admission::Withhold;
    }
    verdict_ = ProverVerdict::AcceptedRenewalSwitch;
  } else if (req.renewal && !pending_ &&
             static_cast<std::uint64_t>(idx) >= std::uint64_t{req.renewal->switch_margin_k} + 1) {
    pending_ = req.renewal;
    pending_key_index_ = idx - req.renewal->switch_margin_k - 1;
  }
  return Admission::Normal;
}

Micros ProverNode::forward_duration() const {
  Micros reading = cfg_.t_max_delay;
  if (cfg_.forward_mode == ForwardTimerMode::HeightScaled && !rtc_mode_) {
    reading = static_cast<Micros>(own_height_) * cfg_.t_report;
  }
  return cfg_.clock.true_duration(reading);
}

std::vector<ProverAction> ProverNode::finish_accept(AttRequest fwd, Micros fire_at,
                                                    Admission admission, Micros now) {
  id_par_ = fwd.id_snd;
  instance_hash_ = fwd.hash_new;
  fwd.id_snd = cfg_.id;

  std::vector<ProverAction> actions;
  actions.reserve(2);
  actions.emplace_back(BroadcastAction{std::move(fwd), cfg_.t_hash});
  if (admission == Admission::Withhold) {
    // Still relay the request so the rest of the network is served.
    state_ = ProverState::ForwardWait;
    actions.emplace_back(
        SetTimerAction{TimerKind::Forward, now + forward_duration(), ++forward_gen_});
  } else {
    state_ = ProverState::AttestWait;
    actions.emplace_back(SetTimerAction{TimerKind::Attest, std::max(fire_at, now), ++attest_gen_});
  }
  return actions;
}

std::vector<ProverAction> ProverNode::on_request(const AttRequest& req, Micros now) {
  return req.variant == Variant::A ? handle_request_A(req, now) : handle_request_B(req, now);
}

std::vector<ProverAction> ProverNode::handle_request_A(const AttRequest& req, Micros now) {
  const Admission admission = admit(req, now);
  if (admission == Admission::Rejected) return {};
  rtc_mode_ = true;
  own_height_ = 0;
  armed_at_ = now;
  return finish_accept(req, req.t_attest - cfg_.clock.rtc_offset, admission, now);
}

std::vector<ProverAction> ProverNode::handle_request_B(const AttRequest& req, Micros now) {
  const Admission admission = admit(req, now);
  if (admission == Admission::Rejected) return {};
  rtc_mode_ = false;
  own_height_ = req.height_cur + 1;
  armed_at_ = now;

  const std::int64_t hops =
      std::max<std::int64_t>(0, std::int64_t{req.height_net} - std::int64_t{req.height_cur});
  const Micros wait = hops * (cfg_.t_request + cfg_.t_hash);

  AttRequest fwd = req;
  fwd.height_cur = req.height_cur + 1;
  return finish_accept(std::move(fwd), now + cfg_.clock.true_duration(wait), admission, now);
}

std::vector<ProverAction> ProverNode::on_attest_timer(Micros now, std::uint32_t generation) {
  if (state_ != ProverState::AttestWait || generation != attest_gen_) {
    verdict_ = ProverVerdict::TimerStale;
    return {};
  }
  state_ = ProverState::Attest;
  verdict_ = ProverVerdict::TimerFired;

  AttReport rep;
  rep.id_dev = cfg_.id;
  rep.id_par = id_par_;
  rep.t_attest_prime =
      rtc_mode_ ? cfg_.clock.rtc_read(now) : cfg_.clock.timer_reading(now - armed_at_);
  rep.hash_new = instance_hash_;
  rep.lmt_dev = reported_lmt();
  rep.auth_report = report_auth(cfg_.key, rep.id_par, rep.t_attest_prime, rep.hash_new, rep.lmt_dev);

  state_ = ProverState::ForwardWait;
  std::vector<ProverAction> actions;
  actions.reserve(2);
  actions.emplace_back(UnicastAction{id_par_, std::move(rep), cfg_.t_mac});
  actions.emplace_back(SetTimerAction{TimerKind::Forward, now + cfg_.t_mac + forward_duration(),
                                      ++forward_gen_});
  return actions;
}

std::vector<ProverAction> ProverNode::on_report(const AttReport& rep) {
  if (state_ != ProverState::ForwardWait || rep.hash_new != instance_hash_) {
    verdict_ = ProverVerdict::DiscardReport;
    return {};
  }
  verdict_ = ProverVerdict::Forwarded;
  return {UnicastAction{id_par_, rep, 0}};
}

std::vector<ProverAction> ProverNode::on_forward_timer(std::uint32_t generation) {
  if (state_ != ProverState::ForwardWait || generation != forward_gen_) {
    verdict_ = ProverVerdict::TimerStale;
    return {};
  }
  verdict_ = ProverVerdict::TimerFired;
  state_ = ProverState::Idle;
  return {};
}

}  // namespace train
