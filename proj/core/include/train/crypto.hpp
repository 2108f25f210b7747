#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <vector>

#include "train/types.hpp"

namespace train::crypto {

Hash sha256(ByteView data);
Hash hmac_sha256(ByteView key, ByteView data);

/// H^times(x). times == 0 returns x.
Hash hash_iterate(const Hash& x, std::uint64_t times);

/// Keyed MAC over an ordered field list. Each field is framed with its
/// 4-byte big-endian length before concatenation, so [b] and [b, ""]
/// produce different tags.
Hash mac(ByteView key, std::span<const ByteView> fields);
Hash mac(ByteView key, std::initializer_list<ByteView> fields);

/// The framed byte string mac() feeds to HMAC-SHA-256.
Bytes frame_fields(std::span<const ByteView> fields);

}  // namespace train::crypto

namespace train {

/// A prover's view of the verifier's chain: the most recent authenticated
/// link (Hash_Cur) and its index (HashInd_Cur).
struct ChainPosition {
  Hash hash_cur;
  std::uint32_t ind_cur = 0;

  friend bool operator==(const ChainPosition&, const ChainPosition&) = default;
};

/// m-link Lamport chain x_0 .. x_m with x_i = H(x_{i-1}). x_0 is the secret
/// root, x_m the public anchor. All links are precomputed.
class HashChain {
 public:
  /// Throws InvalidParameter when m == 0.
  HashChain(const Hash& root, std::uint32_t m);

  const Hash& root() const { return links_.front(); }
  const Hash& anchor() const { return links_.back(); }
  std::uint32_t length() const { return static_cast<std::uint32_t>(links_.size() - 1); }

  /// x_index for index in [0, m]; link(0) is the root.
  const Hash& link(std::uint32_t index) const;

  /// Links x_1 .. x_m, in index order.
  std::span<const Hash> links() const { return std::span<const Hash>(links_).subspan(1); }

  ChainPosition anchor_position() const { return {anchor(), length()}; }

 private:
  std::vector<Hash> links_;
};

HashChain generate_chain(const Hash& root, std::uint32_t m);

/// Accepts iff cand_index < position.ind_cur and
/// H^(ind_cur - cand_index)(candidate) == position.hash_cur.
bool verify_link(const Hash& candidate, std::uint32_t cand_index, const ChainPosition& position);

/// Announcement of a successor chain. auth is a MAC over the new anchor keyed
/// with an old-chain link that is still secret when the payload is sent and is
/// revealed switch_margin_k + 1 instances later.
struct RenewalPayload {
  Hash new_chain_anchor;
  Hash auth;
  std::uint32_t switch_margin_k = 0;

  friend bool operator==(const RenewalPayload&, const RenewalPayload&) = default;
};

/// auth = mac(old_chain.link(current_index - k - 1), [new_anchor]).
/// Throws ChainDepleted when current_index < k + 1.
RenewalPayload build_renewal(const HashChain& old_chain, std::uint32_t current_index,
                             const Hash& new_anchor, std::uint32_t k);

bool verify_renewal(const RenewalPayload& stored, const Hash& revealed_link);

/// Text format: "m=<int>", hex root, then m hex links, one per line.
void write_chain(std::ostream& out, const HashChain& chain);

/// Parses and checks the chain file. Throws InvalidParameter on any
/// structural problem or a link that does not hash from its predecessor.
HashChain read_chain(std::istream& in);

}  // namespace train
