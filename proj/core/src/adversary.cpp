#include "train/adversary.hpp"

#include <array>
#include <type_traits>

namespace train {

namespace {

constexpr std::array<std::pair<std::string_view, MessageField>, 14> kFieldNames{{
    {"id_snd", MessageField::IdSnd},
    {"hash_new", MessageField::HashNew},
    {"hash_ind_new", MessageField::HashIndNew},
    {"t_attest", MessageField::TAttest},
    {"height_cur", MessageField::HeightCur},
    {"height_net", MessageField::HeightNet},
    {"new_chain", MessageField::NewChain},
    {"renewal_auth", MessageField::RenewalAuth},
    {"switch_margin_k", MessageField::SwitchMarginK},
    {"id_dev", MessageField::IdDev},
    {"id_par", MessageField::IdPar},
    {"t_attest_prime", MessageField::TAttestPrime},
    {"lmt", MessageField::Lmt},
    {"auth_report", MessageField::AuthReport},
}};

template <typename T>
bool mutate_int(T& v, const AdversaryRule& rule) {
  using U = std::make_unsigned_t<T>;
  switch (rule.op) {
    case ModifyOp::Set:
      v = static_cast<T>(rule.value);
      return true;
    case ModifyOp::Add:
      v = static_cast<T>(static_cast<U>(static_cast<U>(v) + static_cast<U>(rule.value)));
      return true;
    case ModifyOp::FlipByte: {
      if (rule.byte_index >= sizeof(T)) return false;
      const unsigned shift = 8 * (sizeof(T) - 1 - rule.byte_index);
      v = static_cast<T>(static_cast<U>(v) ^ (static_cast<U>(rule.mask) << shift));
      return true;
    }
  }
  return false;
}

bool mutate_digest(Hash& h, const AdversaryRule& rule) {
  switch (rule.op) {
    case ModifyOp::Set:
      h = rule.digest;
      return true;
    case ModifyOp::Add:
      return false;
    case ModifyOp::FlipByte:
      if (rule.byte_index >= kHashSize) return false;
      h.bytes[rule.byte_index] ^= rule.mask;
      return true;
  }
  return false;
}

bool mutate_request(AttRequest& r, const AdversaryRule& rule) {
  const bool b = r.variant == Variant::B;
  switch (rule.field) {
    case MessageField::IdSnd:
      return mutate_int(r.id_snd, rule);
    case MessageField::HashNew:
      return mutate_digest(r.hash_new, rule);
    case MessageField::HashIndNew:
      return mutate_int(r.hash_ind_new, rule);
    case MessageField::TAttest:
      return mutate_int(r.t_attest, rule);
    case MessageField::HeightCur:
      return b && mutate_int(r.height_cur, rule);
    case MessageField::HeightNet:
      return b && mutate_int(r.height_net, rule);
    case MessageField::NewChain:
      return r.renewal && mutate_digest(r.renewal->new_chain_anchor, rule);
    case MessageField::RenewalAuth:
      return r.renewal && mutate_digest(r.renewal->auth, rule);
    case MessageField::SwitchMarginK:
      return r.renewal && mutate_int(r.renewal->switch_margin_k, rule);
    default:
      return false;
  }
}

bool mutate_report(AttReport& r, const AdversaryRule& rule) {
  switch (rule.field) {
    case MessageField::IdDev:
      return mutate_int(r.id_dev, rule);
    case MessageField::IdPar:
      return mutate_int(r.id_par, rule);
    case MessageField::TAttestPrime:
      return mutate_int(r.t_attest_prime, rule);
    case MessageField::HashNew:
      return mutate_digest(r.hash_new, rule);
    case MessageField::Lmt:
      return r.lmt_dev && mutate_digest(*r.lmt_dev, rule);
    case MessageField::AuthReport:
      return mutate_digest(r.auth_report, rule);
    default:
      return false;
  }
}

}  // namespace

std::string_view to_string(AdversaryAction a) {
  switch (a) {
    case AdversaryAction::Drop:
      return "drop";
    case AdversaryAction::Delay:
      return "delay";
    case AdversaryAction::Modify:
      return "modify";
    case AdversaryAction::Replay:
      return "replay";
    case AdversaryAction::Inject:
      return "inject";
  }
  return "?";
}

AdversaryAction parse_adversary_action(std::string_view name) {
  for (auto a : {AdversaryAction::Drop, AdversaryAction::Delay, AdversaryAction::Modify,
                 AdversaryAction::Replay, AdversaryAction::Inject}) {
    if (to_string(a) == name) return a;
  }
  throw InvalidParameter("unknown adversary action '" + std::string(name) + "'");
}

std::string_view to_string(MessageField f) {
  for (const auto& [name, field] : kFieldNames) {
    if (field == f) return name;
  }
  return "?";
}

MessageField parse_message_field(std::string_view name) {
  for (const auto& [n, field] : kFieldNames) {
    if (n == name) return field;
  }
  throw InvalidParameter("unknown message field '" + std::string(name) + "'");
}

bool is_digest_field(MessageField f) {
  switch (f) {
    case MessageField::HashNew:
    case MessageField::NewChain:
    case MessageField::RenewalAuth:
    case MessageField::Lmt:
    case MessageField::AuthReport:
      return true;
    default:
      return false;
  }
}

ModifyOp parse_modify_op(std::string_view name) {
  if (name == "set") return ModifyOp::Set;
  if (name == "add") return ModifyOp::Add;
  if (name == "flip_byte") return ModifyOp::FlipByte;
  throw InvalidParameter("unknown modify op '" + std::string(name) + "'");
}

Adversary::Adversary(AdversaryScript script)
    : script_(std::move(script)), uses_(script_.rules.size(), 0) {}

std::optional<Bytes> Adversary::modify(ByteView bytes, const AdversaryRule& rule) {
  Message msg;
  try {
    msg = decode(bytes);
  } catch (const Error&) {
    return std::nullopt;
  }
  const bool changed = std::visit(
      [&](auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, AttRequest>) {
          return mutate_request(m, rule);
        } else {
          return mutate_report(m, rule);
        }
      },
      msg);
  if (!changed) return std::nullopt;
  return encode(msg);
}

bool Adversary::matches(const AdversaryRule& rule, const Transit& t, const Message* msg) const {
  const RuleMatch& m = rule.match;
  if (m.from && *m.from != t.from) return false;
  if (m.to && *m.to != t.to) return false;
  if (m.instance && *m.instance != t.instance) return false;
  const PacketClass cls = classify(t.bytes);
  if (m.type == MessageFilter::Request && cls != PacketClass::TrainRequest) return false;
  if (m.type == MessageFilter::Report && cls != PacketClass::TrainReport) return false;
  if (m.id_dev) {
    const auto* rep = msg ? std::get_if<AttReport>(msg) : nullptr;
    if (rep == nullptr || rep->id_dev != *m.id_dev) return false;
  }
  if (m.id_snd) {
    const auto* req = msg ? std::get_if<AttRequest>(msg) : nullptr;
    if (req == nullptr || req->id_snd != *m.id_snd) return false;
  }
  return true;
}

AdversaryEffect Adversary::apply(const Transit& t) {
  AdversaryEffect effect;
  if (script_.empty()) return effect;

  Message msg;
  const Message* decoded_msg = nullptr;
  bool decoded = false;
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    const AdversaryRule& rule = script_.rules[i];
    if (rule.action == AdversaryAction::Inject) continue;
    if (rule.max_uses && uses_[i] >= *rule.max_uses) continue;
    if ((rule.match.id_dev || rule.match.id_snd) && !decoded) {
      decoded = true;
      try {
        msg = decode(t.bytes);
        decoded_msg = &msg;
      } catch (const Error&) {
        decoded_msg = nullptr;
      }
    }
    if (!matches(rule, t, decoded_msg)) continue;

    std::optional<Bytes> rewritten;
    if (rule.action == AdversaryAction::Modify) {
      rewritten = modify(t.bytes, rule);
      if (!rewritten) continue;  // field absent: rule does not apply
    }

    ++uses_[i];
    effect.rule = static_cast<int>(i);
    effect.action = rule.action;
    switch (rule.action) {
      case AdversaryAction::Drop:
        effect.drop = true;
        break;
      case AdversaryAction::Delay:
        effect.extra_delay = rule.delay_us;
        break;
      case AdversaryAction::Modify:
        effect.replaced = std::make_shared<const Bytes>(std::move(*rewritten));
        break;
      case AdversaryAction::Replay:
        if (rule.at_us) {
          effect.replay_at = t.instance_start + *rule.at_us;
        } else {
          effect.replay_at = t.now + rule.after_us.value_or(0);
        }
        break;
      case AdversaryAction::Inject:
        break;
    }
    return effect;
  }
  return effect;
}

std::vector<Injection> Adversary::injections(std::uint32_t instance, Micros instance_start) {
  std::vector<Injection> out;
  for (std::size_t i = 0; i < script_.rules.size(); ++i) {
    const AdversaryRule& rule = script_.rules[i];
    if (rule.action != AdversaryAction::Inject) continue;
    if (rule.match.instance && *rule.match.instance != instance) continue;
    if (rule.max_uses && uses_[i] >= *rule.max_uses) continue;
    ++uses_[i];
    out.push_back(Injection{static_cast<int>(i), rule.match.from.value_or(kVerifierId),
                            rule.match.to.value_or(kVerifierId),
                            instance_start + rule.at_us.value_or(0),
                            std::make_shared<const Bytes>(rule.payload)});
  }
  return out;
}

}  // namespace train
