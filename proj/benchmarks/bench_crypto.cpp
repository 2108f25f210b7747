#include <benchmark/benchmark.h>

#include "train/crypto.hpp"
#include "train/messages.hpp"

using namespace train;

static void BM_Sha256(benchmark::State& state) {
  Hash h{};
  for (auto _ : state) {
    h = crypto::sha256(h.view());
    benchmark::DoNotOptimize(h);
  }
}
BENCHMARK(BM_Sha256);

static void BM_ReportAuth(benchmark::State& state) {
  const DeviceKey key{crypto::sha256(Bytes{1})};
  const Hash h = crypto::sha256(Bytes{2});
  const std::optional<Hash> lmt = state.range(0) ? std::optional<Hash>(h) : std::nullopt;
  Micros t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(report_auth(key, 7, ++t, h, lmt));
}
BENCHMARK(BM_ReportAuth)->Arg(0)->Arg(1);

static void BM_VerifyLinkGap(benchmark::State& state) {
  const auto gap = static_cast<std::uint32_t>(state.range(0));
  const HashChain chain = generate_chain(crypto::sha256(Bytes{3}), 1024);
  const ChainPosition pos{chain.link(1024), 1024};
  for (auto _ : state) benchmark::DoNotOptimize(verify_link(chain.link(1024 - gap), 1024 - gap, pos));
}
BENCHMARK(BM_VerifyLinkGap)->Arg(1)->Arg(16)->Arg(256);

static void BM_GenerateChain(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_chain(Hash{}, static_cast<std::uint32_t>(state.range(0))));
  }
}
BENCHMARK(BM_GenerateChain)->Arg(1024)->Arg(65536);

static void BM_CodecRoundTrip(benchmark::State& state) {
  AttReport r;
  r.id_dev = 9;
  r.lmt_dev = Hash{};
  for (auto _ : state) benchmark::DoNotOptimize(decode(encode(r)));
}
BENCHMARK(BM_CodecRoundTrip);
