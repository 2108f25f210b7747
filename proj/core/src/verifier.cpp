#include "train/verifier.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace train {

Micros compute_timeout(const TimingParams& p) {
  return static_cast<Micros>(p.n) * (p.t_request + p.t_hash + p.t_report) + p.t_mac + p.t_slack;
}

Micros compute_attest_time(const TimingParams& p, Micros now) {
  return static_cast<Micros>(p.height_net) * (p.t_request + p.t_hash) + p.t_slack + now;
}

std::string_view to_string(VerifierState s) {
  switch (s) {
    case VerifierState::Idle:
      return "Idle";
    case VerifierState::Initiate:
      return "Initiate";
    case VerifierState::Collect:
      return "Collect";
    case VerifierState::Tally:
      return "Tally";
  }
  return "?";
}

std::string_view to_string(ReportVerdict v) {
  switch (v) {
    case ReportVerdict::Attest:
      return "attest";
    case ReportVerdict::FailLmt:
      return "fail-lmt";
    case ReportVerdict::FailTiming:
      return "fail-timing";
    case ReportVerdict::DiscardNotCollecting:
      return "discard-not-collecting";
    case ReportVerdict::DiscardHash:
      return "discard-hash";
    case ReportVerdict::DiscardUnknown:
      return "discard-unknown";
    case ReportVerdict::DiscardMac:
      return "discard-mac";
    case ReportVerdict::Duplicate:
      return "duplicate";
  }
  return "?";
}

bool is_accepted(ReportVerdict v) {
  return v == ReportVerdict::Attest || v == ReportVerdict::FailLmt ||
         v == ReportVerdict::FailTiming;
}

std::string_view to_string(RenewalStatus s) {
  switch (s) {
    case RenewalStatus::None:
      return "none";
    case RenewalStatus::Announced:
      return "announced";
    case RenewalStatus::Pending:
      return "pending";
    case RenewalStatus::Confirmed:
      return "confirmed";
    case RenewalStatus::Deferred:
      return "deferred";
  }
  return "?";
}

Verifier::Verifier(HashChain chain, Variant variant, TimingParams timing, Micros sync_tolerance)
    : chain_(std::move(chain)),
      variant_(variant),
      timing_(timing),
      sync_tolerance_(sync_tolerance),
      next_index_(static_cast<std::int64_t>(chain_.length()) - 1) {}

void Verifier::register_device(NodeId id, DeviceRecord record) {
  if (id == kVerifierId) throw InvalidParameter("device id 0 is reserved for the verifier");
  if (state_ != VerifierState::Idle) throw InvalidParameter("cannot register during an instance");
  if (registry_.size() <= id) {
    registry_.resize(static_cast<std::size_t>(id) + 1);
    status_.resize(registry_.size(), Status::Unregistered);
  }
  if (!registry_[id]) ++device_count_;
  registry_[id] = std::move(record);
}

AttRequest Verifier::initiate(Micros now) {
  if (state_ != VerifierState::Idle) throw InvalidParameter("an instance is already running");
  const bool key_reveal = plan_ && plan_->announced && next_index_ == plan_->key_index;
  if (next_index_ < 0 || (next_index_ == 0 && !key_reveal)) {
    throw ChainDepleted("hash chain has no unreleased links left");
  }
  state_ = VerifierState::Initiate;
  const auto index = static_cast<std::uint32_t>(next_index_);

  AttRequest req;
  req.variant = variant_;
  req.id_snd = kVerifierId;
  req.hash_new = chain_.link(index);
  req.hash_ind_new = index;
  req.t_attest = compute_attest_time(timing_, now);
  if (variant_ == Variant::B) {
    req.height_cur = 0;
    req.height_net = timing_.height_net;
  }
  if (plan_ && !plan_->announced) {
    req.renewal = build_renewal(chain_, index, plan_->new_chain.anchor(), plan_->k);
    plan_->announced = true;
    plan_->key_index = index - plan_->k - 1;
  }

  pending_ = PendingInstance{req.hash_new, index, req.t_attest, now + compute_timeout(timing_)};
  outstanding_ = 0;
  for (std::size_t id = 0; id < registry_.size(); ++id) {
    status_[id] = registry_[id] ? Status::NoRep : Status::Unregistered;
    if (registry_[id]) ++outstanding_;
  }
  state_ = VerifierState::Collect;
  return req;
}

Micros Verifier::expected_attest_prime(const DeviceRecord& dev) const {
  if (variant_ == Variant::A) return pending_->t_attest;
  // A device at height h received height_cur = h - 1.
  const std::int64_t hops =
      std::max<std::int64_t>(0, std::int64_t{timing_.height_net} - (std::int64_t{dev.height} - 1));
  return hops * (timing_.t_request + timing_.t_hash);
}

ReportVerdict Verifier::on_report(const AttReport& rep, Micros /*now*/) {
  if (state_ != VerifierState::Collect) return ReportVerdict::DiscardNotCollecting;
  if (rep.hash_new != pending_->hash_new) return ReportVerdict::DiscardHash;
  if (rep.id_dev >= registry_.size() || !registry_[rep.id_dev]) {
    return ReportVerdict::DiscardUnknown;
  }
  const DeviceRecord& dev = *registry_[rep.id_dev];
  if (report_auth(dev.key, rep.id_par, rep.t_attest_prime, rep.hash_new, rep.lmt_dev) !=
      rep.auth_report) {
    return ReportVerdict::DiscardMac;
  }
  Status& slot = status_[rep.id_dev];
  if (slot != Status::NoRep) return ReportVerdict::Duplicate;
  --outstanding_;

  if (std::llabs(rep.t_attest_prime - expected_attest_prime(dev)) > sync_tolerance_) {
    slot = Status::Fail;
    return ReportVerdict::FailTiming;
  }
  if (dev.lmt && rep.lmt_dev != dev.lmt) {
    slot = Status::Fail;
    return ReportVerdict::FailLmt;
  }
  slot = Status::Attest;
  return ReportVerdict::Attest;
}

TallySets Verifier::tally(Micros /*now*/) {
  if (state_ != VerifierState::Collect) throw InvalidParameter("no instance to tally");
  state_ = VerifierState::Tally;

  TallySets sets;
  for (std::size_t id = 0; id < status_.size(); ++id) {
    switch (status_[id]) {
      case Status::Attest:
        sets.attest.push_back(static_cast<NodeId>(id));
        break;
      case Status::Fail:
        sets.fail.push_back(static_cast<NodeId>(id));
        break;
      case Status::NoRep:
        sets.norep.push_back(static_cast<NodeId>(id));
        break;
      case Status::Unregistered:
        break;
    }
  }

  const std::uint32_t revealed = pending_->hash_ind_new;
  next_index_ = static_cast<std::int64_t>(revealed) - 1;
  renewal_status_ = RenewalStatus::None;
  if (plan_ && plan_->announced) {
    if (!sets.norep.empty()) plan_->clean = false;
    if (revealed == plan_->key_index) {
      if (plan_->clean) {
        chain_ = std::move(plan_->new_chain);
        next_index_ = static_cast<std::int64_t>(chain_.length()) - 1;
        renewal_status_ = RenewalStatus::Confirmed;
      } else {
        renewal_status_ = RenewalStatus::Deferred;
      }
      plan_.reset();
    } else {
      renewal_status_ = revealed == plan_->key_index + plan_->k + 1 ? RenewalStatus::Announced
                                                                    : RenewalStatus::Pending;
    }
  }

  pending_.reset();
  state_ = VerifierState::Idle;
  return sets;
}

void Verifier::plan_renewal(HashChain new_chain, std::uint32_t k) {
  if (plan_) throw InvalidParameter("a renewal is already planned");
  if (next_index_ < static_cast<std::int64_t>(k) + 1) {
    throw ChainDepleted("not enough links left for a renewal with margin " + std::to_string(k));
  }
  plan_ = Plan{std::move(new_chain), k, false, 0, true};
}

}  // namespace train
