#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "train/crypto.hpp"
#include "train/types.hpp"

namespace train {

/// Wire layout (all integers big-endian):
///
///   byte 0   type: 0x01 request, 0x02 report
///   byte 1   flags: bit0 variant B, bit1 renewal present, bit2 LMT present
///
///   request: id_snd u32 | hash_new 32 | hash_ind_new u32 | t_attest i64
///            [height_cur u32 | height_net u32]               (variant B)
///            [new_anchor 32 | auth 32 | switch_margin_k u32] (renewal)
///   report:  id_dev u32 | id_par u32 | t_attest_prime i64 | hash_new 32
///            [lmt 32] | auth_report 32
inline constexpr std::uint8_t kTypeRequest = 0x01;
inline constexpr std::uint8_t kTypeReport = 0x02;

inline constexpr std::uint8_t kFlagVariantB = 0x01;
inline constexpr std::uint8_t kFlagRenewal = 0x02;
inline constexpr std::uint8_t kFlagLmt = 0x04;

struct AttRequest {
  Variant variant = Variant::A;
  NodeId id_snd = 0;
  Hash hash_new;
  std::uint32_t hash_ind_new = 0;
  Micros t_attest = 0;
  // Variant B only; must stay zero for variant A.
  std::uint32_t height_cur = 0;
  std::uint32_t height_net = 0;
  std::optional<RenewalPayload> renewal;

  friend bool operator==(const AttRequest&, const AttRequest&) = default;
};

struct AttReport {
  NodeId id_dev = 0;
  NodeId id_par = 0;
  Micros t_attest_prime = 0;
  Hash hash_new;
  std::optional<Hash> lmt_dev;  // RATA only
  Hash auth_report;

  friend bool operator==(const AttReport&, const AttReport&) = default;
};

using Message = std::variant<AttRequest, AttReport>;

enum class PacketClass : std::uint8_t { TrainRequest, TrainReport, Other };

std::size_t encoded_size(const AttRequest& req);
std::size_t encoded_size(const AttReport& rep);

/// Throws InvalidParameter if a variant-A request carries height fields.
Bytes encode(const AttRequest& req);
Bytes encode(const AttReport& rep);
Bytes encode(const Message& msg);

/// Strict inverse of encode: truncated input, trailing bytes and undefined
/// flag bits raise MalformedMessage; an unknown type byte raises
/// UnknownMessageType.
Message decode(ByteView bytes);
AttRequest decode_request(ByteView bytes);
AttReport decode_report(ByteView bytes);

/// NetTCB-style header inspection: only the first byte is examined.
PacketClass classify(ByteView bytes);

/// Auth_report = mac(K_Dev, [id_par, t_attest', hash_new, lmt?]).
Hash report_auth(const DeviceKey& key, NodeId id_par, Micros t_attest_prime, const Hash& hash_new,
                 const std::optional<Hash>& lmt);

}  // namespace train
