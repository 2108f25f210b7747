#include "train/crypto.hpp"

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/sha.h>

#include <istream>
#include <memory>
#include <ostream>
#include <string>

namespace train::crypto {

namespace {

struct MacContext {
  EVP_MAC* mac = nullptr;
  EVP_MAC_CTX* ctx = nullptr;

  MacContext() {
    mac = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
    if (mac == nullptr) throw Error("OpenSSL: HMAC unavailable");
    ctx = EVP_MAC_CTX_new(mac);
    if (ctx == nullptr) throw Error("OpenSSL: cannot allocate MAC context");
    char digest[] = "SHA256";
    OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest, 0),
        OSSL_PARAM_construct_end(),
    };
    if (EVP_MAC_CTX_set_params(ctx, params) != 1) throw Error("OpenSSL: cannot select SHA256");
  }
  ~MacContext() {
    EVP_MAC_CTX_free(ctx);
    EVP_MAC_free(mac);
  }
  MacContext(const MacContext&) = delete;
  MacContext& operator=(const MacContext&) = delete;
};

MacContext& mac_context() {
  thread_local MacContext context;
  return context;
}

void put_u32(Bytes& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

Hash sha256(ByteView data) {
  Hash out;
  SHA256(data.data(), data.size(), out.bytes.data());
  return out;
}

Hash hmac_sha256(ByteView key, ByteView data) {
  auto& c = mac_context();
  // An empty key must still be a non-null pointer for EVP_MAC_init to rekey.
  static const std::uint8_t kEmpty = 0;
  const std::uint8_t* key_ptr = key.empty() ? &kEmpty : key.data();
  Hash out;
  std::size_t written = 0;
  if (EVP_MAC_init(c.ctx, key_ptr, key.size(), nullptr) != 1 ||
      EVP_MAC_update(c.ctx, data.data(), data.size()) != 1 ||
      EVP_MAC_final(c.ctx, out.bytes.data(), &written, out.bytes.size()) != 1 ||
      written != kHashSize) {
    throw Error("OpenSSL: HMAC-SHA256 failed");
  }
  return out;
}

Hash hash_iterate(const Hash& x, std::uint64_t times) {
  Hash cur = x;
  for (std::uint64_t i = 0; i < times; ++i) {
    SHA256(cur.bytes.data(), cur.bytes.size(), cur.bytes.data());
  }
  return cur;
}

Bytes frame_fields(std::span<const ByteView> fields) {
  std::size_t total = 0;
  for (const auto& f : fields) total += 4 + f.size();
  Bytes framed;
  framed.reserve(total);
  for (const auto& f : fields) {
    put_u32(framed, static_cast<std::uint32_t>(f.size()));
    framed.insert(framed.end(), f.begin(), f.end());
  }
  return framed;
}

Hash mac(ByteView key, std::span<const ByteView> fields) {
  return hmac_sha256(key, frame_fields(fields));
}

Hash mac(ByteView key, std::initializer_list<ByteView> fields) {
  return mac(key, std::span<const ByteView>(fields.begin(), fields.size()));
}

}  // namespace train::crypto

namespace train {

HashChain::HashChain(const Hash& root, std::uint32_t m) {
  if (m == 0) {
    throw InvalidParameter("hash chain length must be at least 1");
  }
  links_.reserve(static_cast<std::size_t>(m) + 1);
  links_.push_back(root);
  for (std::uint32_t i = 1; i <= m; ++i) {
    links_.push_back(crypto::sha256(links_.back().view()));
  }
}

const Hash& HashChain::link(std::uint32_t index) const {
  if (index > length()) {
    throw InvalidParameter("chain index " + std::to_string(index) + " beyond anchor");
  }
  return links_[index];
}

HashChain generate_chain(const Hash& root, std::uint32_t m) { return HashChain(root, m); }

bool verify_link(const Hash& candidate, std::uint32_t cand_index, const ChainPosition& position) {
  if (cand_index >= position.ind_cur) {
    return false;
  }
  return crypto::hash_iterate(candidate, position.ind_cur - cand_index) == position.hash_cur;
}

RenewalPayload build_renewal(const HashChain& old_chain, std::uint32_t current_index,
                             const Hash& new_anchor, std::uint32_t k) {
  if (static_cast<std::uint64_t>(current_index) < static_cast<std::uint64_t>(k) + 1) {
    throw ChainDepleted("not enough unreleased links for a renewal with margin " +
                        std::to_string(k));
  }
  const Hash& key_link = old_chain.link(current_index - k - 1);
  return RenewalPayload{new_anchor, crypto::mac(key_link.view(), {new_anchor.view()}), k};
}

bool verify_renewal(const RenewalPayload& stored, const Hash& revealed_link) {
  return crypto::mac(revealed_link.view(), {stored.new_chain_anchor.view()}) == stored.auth;
}

void write_chain(std::ostream& out, const HashChain& chain) {
  out << "m=" << chain.length() << '\n';
  out << chain.root().hex() << '\n';
  for (const auto& link : chain.links()) {
    out << link.hex() << '\n';
  }
}

HashChain read_chain(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("m=", 0) != 0) {
    throw InvalidParameter("chain file: missing 'm=<int>' header");
  }
  std::uint64_t m = 0;
  try {
    std::size_t used = 0;
    m = std::stoull(line.substr(2), &used);
    if (used != line.size() - 2) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw InvalidParameter("chain file: malformed length header '" + line + "'");
  }
  if (m == 0 || m > UINT32_MAX) {
    throw InvalidParameter("chain file: length out of range");
  }
  auto read_hash = [&](std::uint64_t index) {
    if (!std::getline(in, line)) {
      throw InvalidParameter("chain file: truncated at index " + std::to_string(index));
    }
    try {
      return Hash::from_hex(line);
    } catch (const InvalidParameter&) {
      throw InvalidParameter("chain file: bad hex at index " + std::to_string(index));
    }
  };
  Hash root = read_hash(0);
  HashChain chain(root, static_cast<std::uint32_t>(m));
  for (std::uint64_t i = 1; i <= m; ++i) {
    if (read_hash(i) != chain.link(static_cast<std::uint32_t>(i))) {
      throw InvalidParameter("chain file: link " + std::to_string(i) +
                             " is not the hash of its predecessor");
    }
  }
  while (std::getline(in, line)) {
    if (!line.empty()) throw InvalidParameter("chain file: trailing content");
  }
  return chain;
}

}  // namespace train
