#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "train/messages.hpp"
#include "train/types.hpp"

namespace train {

enum class MessageFilter : std::uint8_t { Any, Request, Report };

enum class AdversaryAction : std::uint8_t { Drop, Delay, Modify, Replay, Inject };
std::string_view to_string(AdversaryAction a);
AdversaryAction parse_adversary_action(std::string_view name);

enum class MessageField : std::uint8_t {
  IdSnd,
  HashNew,
  HashIndNew,
  TAttest,
  HeightCur,
  HeightNet,
  NewChain,
  RenewalAuth,
  SwitchMarginK,
  IdDev,
  IdPar,
  TAttestPrime,
  Lmt,
  AuthReport,
};
std::string_view to_string(MessageField f);
/// Throws InvalidParameter for an unknown name.
MessageField parse_message_field(std::string_view name);
/// True for 32-byte fields (hash_new, new_chain, renewal_auth, lmt, auth_report).
bool is_digest_field(MessageField f);

enum class ModifyOp : std::uint8_t { Set, Add, FlipByte };
ModifyOp parse_modify_op(std::string_view name);

struct RuleMatch {
  std::optional<NodeId> from;
  std::optional<NodeId> to;
  MessageFilter type = MessageFilter::Any;
  std::optional<std::uint32_t> instance;
  std::optional<NodeId> id_dev;  // reports only
  std::optional<NodeId> id_snd;  // requests only
};

struct AdversaryRule {
  RuleMatch match;
  AdversaryAction action = AdversaryAction::Drop;
  std::optional<std::uint32_t> max_uses;

  Micros delay_us = 0;  // Delay

  MessageField field = MessageField::TAttest;  // Modify
  ModifyOp op = ModifyOp::Add;
  std::int64_t value = 0;     // Set / Add on integer fields
  Hash digest;                // Set on digest fields
  std::uint32_t byte_index = 0;  // FlipByte, big-endian byte position in the field
  std::uint8_t mask = 0xff;

  std::optional<Micros> at_us;     // Replay / Inject: offset from instance start
  std::optional<Micros> after_us;  // Replay: offset from interception

  Bytes payload;  // Inject; match.from/match.to name the link
};

struct AdversaryScript {
  std::vector<AdversaryRule> rules;
  bool empty() const { return rules.empty(); }
};

/// A frame on a link, as seen from the Dolev-Yao position.
struct Transit {
  NodeId from = 0;
  NodeId to = 0;
  std::uint32_t instance = 0;
  Micros now = 0;
  Micros instance_start = 0;
  ByteView bytes;
};

struct AdversaryEffect {
  int rule = -1;  // index of the applied rule, -1 when the frame passes untouched
  AdversaryAction action = AdversaryAction::Drop;
  bool drop = false;
  std::shared_ptr<const Bytes> replaced;  // set by Modify
  Micros extra_delay = 0;
  std::optional<Micros> replay_at;  // absolute time of the cloned delivery
};

struct Injection {
  int rule = -1;
  NodeId from = 0;
  NodeId to = 0;
  Micros at = 0;  // absolute time
  std::shared_ptr<const Bytes> bytes;
};

/// Applies the first matching rule to a frame. The adversary sees only the
/// bytes in transit and never holds keys or chain secrets.
class Adversary {
 public:
  explicit Adversary(AdversaryScript script);

  AdversaryEffect apply(const Transit& t);
  std::vector<Injection> injections(std::uint32_t instance, Micros instance_start);
  bool empty() const { return script_.empty(); }

  /// Rewrites one field of an encoded message. Returns nullopt when the bytes
  /// do not decode or the field is absent from this message.
  static std::optional<Bytes> modify(ByteView bytes, const AdversaryRule& rule);

 private:
  bool matches(const AdversaryRule& rule, const Transit& t, const Message* msg) const;

  AdversaryScript script_;
  std::vector<std::uint32_t> uses_;
};

}  // namespace train
