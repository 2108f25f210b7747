#include "train/messages.hpp"

#include <algorithm>
#include <array>

namespace train {

namespace {

class Writer {
 public:
  explicit Writer(std::size_t reserve) { out_.reserve(reserve); }

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  void i64(std::int64_t v) {
    auto u = static_cast<std::uint64_t>(v);
    for (int shift = 56; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(u >> shift));
  }
  void hash(const Hash& h) { out_.insert(out_.end(), h.bytes.begin(), h.bytes.end()); }

  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_++];
    return v;
  }
  std::int64_t i64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | in_[pos_++];
    return static_cast<std::int64_t>(v);
  }
  Hash hash() {
    need(kHashSize);
    Hash h;
    std::copy_n(in_.begin() + static_cast<std::ptrdiff_t>(pos_), kHashSize, h.bytes.begin());
    pos_ += kHashSize;
    return h;
  }
  void finish() const {
    if (pos_ != in_.size()) throw MalformedMessage("trailing bytes after message");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw MalformedMessage("truncated message");
  }

  ByteView in_;
  std::size_t pos_ = 0;
};

void put_be32(std::array<std::uint8_t, 4>& out, std::uint32_t v) {
  out = {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
         static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
}

void put_be64(std::array<std::uint8_t, 8>& out, std::int64_t v) {
  auto u = static_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(u >> (56 - 8 * i));
}

constexpr std::size_t kRequestBase = 1 + 1 + 4 + kHashSize + 4 + 8;
constexpr std::size_t kHeightFields = 8;
constexpr std::size_t kRenewalFields = kHashSize + kHashSize + 4;
constexpr std::size_t kReportBase = 1 + 1 + 4 + 4 + 8 + kHashSize + kHashSize;

}  // namespace

std::size_t encoded_size(const AttRequest& req) {
  return kRequestBase + (req.variant == Variant::B ? kHeightFields : 0) +
         (req.renewal ? kRenewalFields : 0);
}

std::size_t encoded_size(const AttReport& rep) {
  return kReportBase + (rep.lmt_dev ? kHashSize : 0);
}

Bytes encode(const AttRequest& req) {
  if (req.variant == Variant::A && (req.height_cur != 0 || req.height_net != 0)) {
    throw InvalidParameter("variant A requests carry no height fields");
  }
  std::uint8_t flags = 0;
  if (req.variant == Variant::B) flags |= kFlagVariantB;
  if (req.renewal) flags |= kFlagRenewal;

  Writer w(encoded_size(req));
  w.u8(kTypeRequest);
  w.u8(flags);
  w.u32(req.id_snd);
  w.hash(req.hash_new);
  w.u32(req.hash_ind_new);
  w.i64(req.t_attest);
  if (req.variant == Variant::B) {
    w.u32(req.height_cur);
    w.u32(req.height_net);
  }
  if (req.renewal) {
    w.hash(req.renewal->new_chain_anchor);
    w.hash(req.renewal->auth);
    w.u32(req.renewal->switch_margin_k);
  }
  return w.take();
}

Bytes encode(const AttReport& rep) {
  Writer w(encoded_size(rep));
  w.u8(kTypeReport);
  w.u8(rep.lmt_dev ? kFlagLmt : 0);
  w.u32(rep.id_dev);
  w.u32(rep.id_par);
  w.i64(rep.t_attest_prime);
  w.hash(rep.hash_new);
  if (rep.lmt_dev) w.hash(*rep.lmt_dev);
  w.hash(rep.auth_report);
  return w.take();
}

Bytes encode(const Message& msg) {
  return std::visit([](const auto& m) { return encode(m); }, msg);
}

AttRequest decode_request(ByteView bytes) {
  Reader r(bytes);
  if (r.u8() != kTypeRequest) throw MalformedMessage("not a request");
  const std::uint8_t flags = r.u8();
  if ((flags & ~(kFlagVariantB | kFlagRenewal)) != 0) {
    throw MalformedMessage("undefined request flag bits");
  }
  AttRequest req;
  req.variant = (flags & kFlagVariantB) ? Variant::B : Variant::A;
  req.id_snd = r.u32();
  req.hash_new = r.hash();
  req.hash_ind_new = r.u32();
  req.t_attest = r.i64();
  if (req.variant == Variant::B) {
    req.height_cur = r.u32();
    req.height_net = r.u32();
  }
  if (flags & kFlagRenewal) {
    RenewalPayload p;
    p.new_chain_anchor = r.hash();
    p.auth = r.hash();
    p.switch_margin_k = r.u32();
    req.renewal = p;
  }
  r.finish();
  return req;
}

AttReport decode_report(ByteView bytes) {
  Reader r(bytes);
  if (r.u8() != kTypeReport) throw MalformedMessage("not a report");
  const std::uint8_t flags = r.u8();
  if ((flags & ~kFlagLmt) != 0) {
    throw MalformedMessage("undefined report flag bits");
  }
  AttReport rep;
  rep.id_dev = r.u32();
  rep.id_par = r.u32();
  rep.t_attest_prime = r.i64();
  rep.hash_new = r.hash();
  if (flags & kFlagLmt) rep.lmt_dev = r.hash();
  rep.auth_report = r.hash();
  r.finish();
  return rep;
}

Message decode(ByteView bytes) {
  if (bytes.empty()) throw MalformedMessage("empty message");
  switch (bytes[0]) {
    case kTypeRequest:
      return decode_request(bytes);
    case kTypeReport:
      return decode_report(bytes);
    default:
      throw UnknownMessageType("unknown message type byte " + std::to_string(bytes[0]));
  }
}

PacketClass classify(ByteView bytes) {
  if (bytes.empty()) return PacketClass::Other;
  switch (bytes[0]) {
    case kTypeRequest:
      return PacketClass::TrainRequest;
    case kTypeReport:
      return PacketClass::TrainReport;
    default:
      return PacketClass::Other;
  }
}

Hash report_auth(const DeviceKey& key, NodeId id_par, Micros t_attest_prime, const Hash& hash_new,
                 const std::optional<Hash>& lmt) {
  std::array<std::uint8_t, 4> par{};
  std::array<std::uint8_t, 8> t{};
  put_be32(par, id_par);
  put_be64(t, t_attest_prime);
  if (lmt) {
    return crypto::mac(key.view(), {par, t, hash_new.view(), lmt->view()});
  }
  return crypto::mac(key.view(), {par, t, hash_new.view()});
}

}  // namespace train
