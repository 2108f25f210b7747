#include <doctest.h>

#include <random>

#include "train/messages.hpp"

using namespace train;

namespace {

Hash random_hash(std::mt19937_64& rng) {
  Hash h;
  for (auto& b : h.bytes) b = static_cast<std::uint8_t>(rng());
  return h;
}

Message random_message(std::mt19937_64& rng) {
  if (rng() % 2 == 0) {
    AttRequest r;
    r.variant = rng() % 2 ? Variant::B : Variant::A;
    r.id_snd = static_cast<NodeId>(rng());
    r.hash_new = random_hash(rng);
    r.hash_ind_new = static_cast<std::uint32_t>(rng());
    r.t_attest = static_cast<Micros>(rng());
    if (r.variant == Variant::B) {
      r.height_cur = static_cast<std::uint32_t>(rng());
      r.height_net = static_cast<std::uint32_t>(rng());
    }
    if (rng() % 3 == 0) {
      r.renewal = RenewalPayload{random_hash(rng), random_hash(rng), static_cast<std::uint32_t>(rng())};
    }
    return r;
  }
  AttReport p;
  p.id_dev = static_cast<NodeId>(rng());
  p.id_par = static_cast<NodeId>(rng());
  p.t_attest_prime = static_cast<Micros>(rng());
  p.hash_new = random_hash(rng);
  if (rng() % 2) p.lmt_dev = random_hash(rng);
  p.auth_report = random_hash(rng);
  return p;
}

}  // namespace

TEST_CASE("minimal variant-A request layout") {
  AttRequest r;
  const Bytes b = encode(r);
  REQUIRE(b.size() == 50);
  CHECK(b[0] == 0x01);
  CHECK(b[1] == 0x00);
  CHECK(std::all_of(b.begin() + 2, b.end(), [](std::uint8_t x) { return x == 0; }));
}

TEST_CASE("frame sizes") {
  AttRequest a;
  AttRequest b;
  b.variant = Variant::B;
  CHECK(encode(b).size() == encode(a).size() + 8);
  b.renewal = RenewalPayload{};
  CHECK(encode(b).size() == 58 + 68);
  CHECK(encode(b)[1] == (kFlagVariantB | kFlagRenewal));

  AttReport casu;
  CHECK(encode(casu).size() == 82);
  AttReport rata;
  rata.lmt_dev = Hash{};
  CHECK(encode(rata).size() == 114);
  CHECK(encode(rata)[1] == kFlagLmt);
  CHECK(encoded_size(rata) == 114);
}

TEST_CASE("big-endian integer fields") {
  AttRequest r;
  r.id_snd = 0x01020304;
  r.t_attest = 0x0a0b0c0d0e0f1011;
  const Bytes b = encode(r);
  CHECK(b[2] == 0x01);
  CHECK(b[5] == 0x04);
  CHECK(b[42] == 0x0a);
  CHECK(b[49] == 0x11);
}

TEST_CASE("variant A cannot carry heights") {
  AttRequest r;
  r.height_net = 3;
  CHECK_THROWS_AS(encode(r), InvalidParameter);
}

TEST_CASE("decode inverts encode on random messages") {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 10000; ++i) {
    const Message m = random_message(rng);
    const Bytes b = encode(m);
    CHECK(decode(b) == m);
    CHECK(encode(decode(b)) == b);
    const std::size_t expected =
        std::visit([](const auto& x) { return encoded_size(x); }, m);
    CHECK(b.size() == expected);
  }
}

TEST_CASE("truncated and padded input is malformed") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 2000; ++i) {
    Bytes b = encode(random_message(rng));
    Bytes cut(b.begin(), b.end() - 1);
    CHECK_THROWS_AS(decode(cut), MalformedMessage);
    b.push_back(0);
    CHECK_THROWS_AS(decode(b), MalformedMessage);
  }
}

TEST_CASE("decode errors") {
  CHECK_THROWS_AS(decode(Bytes{}), MalformedMessage);
  CHECK_THROWS_AS(decode(Bytes{0x7f}), UnknownMessageType);
  Bytes b = encode(AttRequest{});
  b[1] = 0x80;
  CHECK_THROWS_AS(decode(b), MalformedMessage);
  Bytes r = encode(AttReport{});
  r[1] = kFlagVariantB;
  CHECK_THROWS_AS(decode(r), MalformedMessage);
}

TEST_CASE("classify looks at the first byte only") {
  CHECK(classify(Bytes{0x01}) == PacketClass::TrainRequest);
  CHECK(classify(Bytes{0x02, 0xff}) == PacketClass::TrainReport);
  CHECK(classify(Bytes{0xaa}) == PacketClass::Other);
  CHECK(classify(Bytes{}) == PacketClass::Other);
}

TEST_CASE("report_auth covers every authenticated field") {
  DeviceKey key{Hash::from_hex(std::string(64, '5'))};
  Hash h{};
  const Hash base = report_auth(key, 1, 100, h, std::nullopt);
  CHECK(report_auth(key, 2, 100, h, std::nullopt) != base);
  CHECK(report_auth(key, 1, 101, h, std::nullopt) != base);
  h.bytes[3] = 1;
  CHECK(report_auth(key, 1, 100, h, std::nullopt) != base);
  CHECK(report_auth(key, 1, 100, Hash{}, Hash{}) != base);
}
