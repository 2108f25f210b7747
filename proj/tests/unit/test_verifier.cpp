#include <doctest.h>

#include <random>

#include "../oracle/sha256_ref.hpp"
#include "train/verifier.hpp"

using namespace train;

namespace {

TimingParams small_timing(std::uint64_t n = 3, std::uint32_t height = 1) {
  return TimingParams{n, 1000, 13000, 1000, 29500, 5000, height};
}

DeviceKey key_for(NodeId id) { return DeviceKey{crypto::sha256(Bytes{static_cast<std::uint8_t>(id)})}; }

AttReport report_for(NodeId id, Micros t_prime, const Hash& hash_new,
                     std::optional<Hash> lmt = std::nullopt) {
  AttReport r;
  r.id_dev = id;
  r.id_par = 0;
  r.t_attest_prime = t_prime;
  r.hash_new = hash_new;
  r.lmt_dev = lmt;
  r.auth_report = report_auth(key_for(id), 0, t_prime, hash_new, lmt);
  return r;
}

Verifier make_verifier(Variant v = Variant::A, bool rata = false, std::uint32_t m = 16,
                       TimingParams tp = small_timing()) {
  Verifier ver(HashChain(crypto::sha256(Bytes{42}), m), v, tp, tp.t_slack);
  for (NodeId id = 1; id <= tp.n; ++id) {
    DeviceRecord rec;
    rec.key = key_for(id);
    if (rata) rec.lmt = crypto::sha256(Bytes{static_cast<std::uint8_t>(100 + id)});
    rec.height = 1;
    ver.register_device(id, rec);
  }
  return ver;
}

}  // namespace

TEST_CASE("timeout formula") {
  CHECK(compute_timeout(TimingParams{3, 1000, 13000, 1000, 29500, 5000, 0}) == 79500);
  CHECK(compute_timeout(TimingParams{}) == 0);
  CHECK(compute_timeout(TimingParams{0, 1, 2, 3, 40, 50, 9}) == 90);
}

TEST_CASE("attest time formula") {
  TimingParams p{0, 1000, 13000, 0, 0, 5000, 10};
  CHECK(compute_attest_time(p, 0) == 145000);
  p.height_net = 0;
  CHECK(compute_attest_time(p, 77) == 5077);
  p.height_net = 20;
  CHECK(compute_attest_time(p, 0) - 145000 == 10 * 14000);
}

TEST_CASE("formulas agree with the independent oracle") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    TimingParams p;
    p.n = rng() % 1'000'001;
    p.t_request = static_cast<Micros>(rng() % 100'000);
    p.t_hash = static_cast<Micros>(rng() % 100'000);
    p.t_report = static_cast<Micros>(rng() % 100'000);
    p.t_mac = static_cast<Micros>(rng() % 100'000);
    p.t_slack = static_cast<Micros>(rng() % 10'000'000);
    p.height_net = static_cast<std::uint32_t>(rng() % 1'000'001);
    const Micros now = static_cast<Micros>(rng() % 1'000'000'000);
    CHECK(compute_timeout(p) == oracle::timeout(static_cast<std::int64_t>(p.n), p.t_request,
                                                p.t_hash, p.t_report, p.t_mac, p.t_slack));
    CHECK(compute_attest_time(p, now) ==
          oracle::attest_time(p.height_net, p.t_request, p.t_hash, p.t_slack, now));
  }
}

TEST_CASE("initiate") {
  SUBCASE("first reveal is one below the anchor") {
    auto v = make_verifier(Variant::A, false, 1024);
    auto req = v.initiate(0);
    CHECK(req.hash_ind_new == 1023);
    CHECK(req.hash_new == v.chain().link(1023));
    CHECK(req.t_attest == 14000 + 5000);
    CHECK(v.state() == VerifierState::Collect);
    CHECK(v.pending()->t_timeout == 79500);
  }
  SUBCASE("variant B starts at height 0") {
    auto v = make_verifier(Variant::B);
    auto req = v.initiate(0);
    CHECK(req.variant == Variant::B);
    CHECK(req.height_cur == 0);
    CHECK(req.height_net == 1);
  }
  SUBCASE("depletion") {
    auto v = make_verifier(Variant::A, false, 2);
    v.initiate(0);
    v.tally(1);
    CHECK(v.next_index() == 0);
    CHECK_THROWS_AS(v.initiate(2), ChainDepleted);
  }
}

TEST_CASE("report handling") {
  auto v = make_verifier(Variant::A, true);
  const auto req = v.initiate(0);
  const Hash lmt1 = crypto::sha256(Bytes{101});
  const Hash lmt2 = crypto::sha256(Bytes{102});

  CHECK(v.on_report(report_for(1, req.t_attest, req.hash_new, lmt1), 10) == ReportVerdict::Attest);
  CHECK(v.on_report(report_for(2, req.t_attest, req.hash_new, crypto::sha256(Bytes{0})), 10) ==
        ReportVerdict::FailLmt);
  CHECK(v.on_report(report_for(1, req.t_attest, req.hash_new, lmt1), 10) ==
        ReportVerdict::Duplicate);

  auto forged = report_for(3, req.t_attest, req.hash_new, crypto::sha256(Bytes{103}));
  forged.auth_report.bytes[0] ^= 1;
  CHECK(v.on_report(forged, 10) == ReportVerdict::DiscardMac);
  CHECK(v.on_report(report_for(9, req.t_attest, req.hash_new), 10) == ReportVerdict::DiscardUnknown);
  CHECK(v.on_report(report_for(3, req.t_attest, v.chain().link(3), crypto::sha256(Bytes{103})), 10) ==
        ReportVerdict::DiscardHash);
  CHECK_FALSE(v.complete());

  const auto sets = v.tally(100);
  CHECK(sets.attest == std::vector<NodeId>{1});
  CHECK(sets.fail == std::vector<NodeId>{2});
  CHECK(sets.norep == std::vector<NodeId>{3});
  CHECK(v.state() == VerifierState::Idle);
  CHECK(v.on_report(report_for(3, req.t_attest, req.hash_new, crypto::sha256(Bytes{103})), 200) ==
        ReportVerdict::DiscardNotCollecting);
  (void)lmt2;
}

TEST_CASE("timing check") {
  auto v = make_verifier();
  const auto req = v.initiate(0);
  CHECK(v.on_report(report_for(1, req.t_attest + 5000, req.hash_new), 1) == ReportVerdict::Attest);
  CHECK(v.on_report(report_for(2, req.t_attest - 5001, req.hash_new), 1) ==
        ReportVerdict::FailTiming);
  CHECK(v.on_report(report_for(3, req.t_attest, req.hash_new), 1) == ReportVerdict::Attest);
  CHECK(v.complete());
}

TEST_CASE("variant B timing check uses the device height") {
  TimingParams tp = small_timing(2, 3);
  Verifier v(HashChain(crypto::sha256(Bytes{1}), 8), Variant::B, tp, 0);
  v.register_device(1, DeviceRecord{key_for(1), std::nullopt, 1});
  v.register_device(2, DeviceRecord{key_for(2), std::nullopt, 3});
  const auto req = v.initiate(0);
  CHECK(v.on_report(report_for(1, 3 * 14000, req.hash_new), 1) == ReportVerdict::Attest);
  CHECK(v.on_report(report_for(2, 3 * 14000, req.hash_new), 1) == ReportVerdict::FailTiming);
}

TEST_CASE("tally partitions the registry") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto v = make_verifier(Variant::A, true, 4, small_timing(20));
    const auto req = v.initiate(0);
    for (NodeId id = 1; id <= 20; ++id) {
      switch (rng() % 3) {
        case 0:
          v.on_report(report_for(id, req.t_attest, req.hash_new,
                                 crypto::sha256(Bytes{static_cast<std::uint8_t>(100 + id)})),
                      1);
          break;
        case 1:
          v.on_report(report_for(id, req.t_attest, req.hash_new, Hash{}), 1);
          break;
        default:
          break;
      }
    }
    const auto s = v.tally(2);
    std::vector<NodeId> all;
    all.insert(all.end(), s.attest.begin(), s.attest.end());
    all.insert(all.end(), s.fail.begin(), s.fail.end());
    all.insert(all.end(), s.norep.begin(), s.norep.end());
    std::sort(all.begin(), all.end());
    std::vector<NodeId> expected(20);
    std::iota(expected.begin(), expected.end(), 1);
    CHECK(all == expected);
  }
}

TEST_CASE("renewal planning") {
  HashChain next(crypto::sha256(Bytes{77}), 16);

  SUBCASE("announce, then confirm after a clean window") {
    auto v = make_verifier(Variant::A, false, 16);
    v.plan_renewal(next, 2);
    auto req = v.initiate(0);
    REQUIRE(req.renewal.has_value());
    CHECK(req.hash_ind_new == 15);
    CHECK(verify_renewal(*req.renewal, v.chain().link(12)));
    auto answer_all = [&](const AttRequest& r) {
      for (NodeId id = 1; id <= 3; ++id) v.on_report(report_for(id, r.t_attest, r.hash_new), 1);
    };
    answer_all(req);
    v.tally(1);
    CHECK(v.renewal_status() == RenewalStatus::Announced);
    for (std::uint32_t idx : {14u, 13u}) {
      req = v.initiate(10);
      CHECK(req.hash_ind_new == idx);
      CHECK_FALSE(req.renewal.has_value());
      answer_all(req);
      v.tally(11);
      CHECK(v.renewal_status() == RenewalStatus::Pending);
    }
    req = v.initiate(20);
    CHECK(req.hash_ind_new == 12);
    answer_all(req);
    v.tally(21);
    CHECK(v.renewal_status() == RenewalStatus::Confirmed);
    CHECK(v.chain().anchor() == next.anchor());
    CHECK(v.next_index() == 15);
  }

  SUBCASE("unresponsive prover defers the switch") {
    auto v = make_verifier(Variant::A, false, 16);
    v.plan_renewal(next, 0);
    auto req = v.initiate(0);
    v.on_report(report_for(1, req.t_attest, req.hash_new), 1);
    v.tally(1);
    req = v.initiate(10);
    CHECK(req.hash_ind_new == 14);
    for (NodeId id = 1; id <= 3; ++id) v.on_report(report_for(id, req.t_attest, req.hash_new), 1);
    v.tally(11);
    CHECK(v.renewal_status() == RenewalStatus::Deferred);
    CHECK(v.chain().anchor() != next.anchor());
    CHECK(v.next_index() == 13);
    CHECK_FALSE(v.renewal_planned());
  }

  SUBCASE("key index 0 may be revealed") {
    auto v = make_verifier(Variant::A, false, 2);
    v.plan_renewal(next, 0);
    auto req = v.initiate(0);
    CHECK(req.hash_ind_new == 1);
    for (NodeId id = 1; id <= 3; ++id) v.on_report(report_for(id, req.t_attest, req.hash_new), 1);
    v.tally(1);
    req = v.initiate(2);
    CHECK(req.hash_ind_new == 0);
    for (NodeId id = 1; id <= 3; ++id) v.on_report(report_for(id, req.t_attest, req.hash_new), 3);
    v.tally(3);
    CHECK(v.renewal_status() == RenewalStatus::Confirmed);
    CHECK(v.initiate(4).hash_ind_new == 15);
  }

  SUBCASE("insufficient links") {
    auto v = make_verifier(Variant::A, false, 3);
    CHECK_THROWS_AS(v.plan_renewal(next, 2), ChainDepleted);
  }
}
