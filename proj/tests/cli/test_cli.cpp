#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "train_cli/commands.hpp"
#include "train_cli/config.hpp"

using namespace train;
using nlohmann::json;

namespace {

const std::string kData = TRAIN_TEST_DATA_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::main_with(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::string tmp(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("train_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream b;
  b << in.rdbuf();
  return b.str();
}

}  // namespace

TEST_CASE("run: default config") {
  auto r = invoke({"run", kData + "/default.json"});
  REQUIRE(r.code == 0);
  auto out = lines(r.out);
  REQUIRE(out.size() == 1);
  const json j = json::parse(out[0]);
  CHECK(j["instance"] == 0);
  CHECK(j["tally"]["attest"].size() == 10);
  CHECK(j["tally"]["toctou_sa_us"] == 0);
  CHECK(j["metrics"]["toctou_sa_us"] == 0);
  CHECK(r.err.empty());
}

TEST_CASE("run: compromised RATA prover fails") {
  auto r = invoke({"run", kData + "/rata_compromised.json"});
  REQUIRE(r.code == 0);
  const json j = json::parse(lines(r.out).at(0));
  CHECK(j["tally"]["fail"] == json::array({6}));
  CHECK(j["tally"]["attest"].size() == 14);
}

TEST_CASE("run: trace and sidecar") {
  const std::string trace = tmp("trace.bin"), side = tmp("side.json");
  auto r = invoke({"run", kData + "/adversary.json", "--trace", trace, "--sidecar", side});
  REQUIRE(r.code == 0);
  auto out = lines(r.out);
  REQUIRE(out.size() == 2);
  CHECK(json::parse(out[0])["tally"]["norep"] == json::array({2, 3, 4, 5}));
  CHECK(json::parse(out[1])["tally"]["norep"] == json::array({4}));
  const json sc = json::parse(slurp(side));
  CHECK(sc["instances"].size() == 2);

  auto shown = invoke({"trace", "show", trace});
  REQUIRE(shown.code == 0);
  const auto events = lines(shown.out);
  REQUIRE_FALSE(events.empty());
  CHECK(json::parse(events.front())["kind"] == "initiate");

  // Same inputs, same bytes.
  const std::string first = slurp(trace);
  REQUIRE(invoke({"run", kData + "/adversary.json", "--trace", trace}).code == 0);
  CHECK(slurp(trace) == first);
}

TEST_CASE("run: config errors exit 2") {
  auto syntax = invoke({"run", kData + "/bad_syntax.json"});
  CHECK(syntax.code == 2);
  CHECK(syntax.err.find("line 3") != std::string::npos);

  auto unknown = invoke({"run", kData + "/unknown_key.json"});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("topolgy") != std::string::npos);

  CHECK(invoke({"run", kData + "/does_not_exist.json"}).code == 2);
  CHECK(invoke({"run"}).code == 2);
  CHECK(invoke({}).code == 2);
}

TEST_CASE("config field diagnostics") {
  auto bad = [](const char* text, const char* field) {
    try {
      cli::parse_config(text);
      return false;
    } catch (const ConfigError& e) {
      return std::string(e.what()).find(field) != std::string::npos;
    }
  };
  CHECK(bad(R"({"variant":"C"})", "variant"));
  CHECK(bad(R"({"timing":{"t_hash_us":-1}})", "timing.t_hash_us"));
  CHECK(bad(R"({"timing":{"t_hash_us":"x"}})", "timing.t_hash_us"));
  CHECK(bad(R"({"clock":{"drift_ppm":[5,1]}})", "clock.drift_ppm"));
  CHECK(bad(R"({"adversary":[{"action":"modify"}]})", "adversary[0].field"));
  CHECK(bad(R"({"adversary":[{"action":"drop","colour":1}]})", "adversary[0].colour"));
  CHECK(bad(R"({"adversary":[{"action":"modify","field":"lmt","op":"add"}]})", "adversary[0].op"));
  CHECK(bad(R"({"backend":"TPM"})", "backend"));
  CHECK(bad(R"({"topology":{"kind":"custom"}})", "topology.parents"));
}

TEST_CASE("config defaults and extras") {
  const Scenario s = cli::parse_config("{}");
  CHECK(s.variant == Variant::A);
  CHECK(s.topology.kind == TopologyKind::Star);
  CHECK(s.topology.n == 10);
  CHECK(s.backend == Backend::Casu);
  CHECK(s.instances == 1);
  CHECK(s.chain_m == 1024);
  CHECK(s.renewal_k == 2);
  CHECK(s.timing.t_hash == 13000);
  CHECK(s.timing.t_mac == 29500);

  const Scenario t = cli::parse_config(
      R"({"topology":{"kind":"custom","parents":[0,1,1]},"link":{"queueing":"fifo","jitter_us":3},
          "forward_timer":"height_scaled","sync_tolerance_us":10,"renewal":false})");
  CHECK(t.parents == std::vector<NodeId>{0, 0, 1, 1});
  CHECK(t.link.queueing == Queueing::Fifo);
  CHECK(t.forward_mode == ForwardTimerMode::HeightScaled);
  CHECK(t.sync_tolerance == 10);
  CHECK_FALSE(t.renewal);
}

TEST_CASE("seed override") {
  Scenario s;
  cli::apply_seed_override(s, "0x1f");
  CHECK(s.seed == 31);
  cli::apply_seed_override(s, "42");
  CHECK(s.seed == 42);
  cli::apply_seed_override(s, nullptr);
  CHECK(s.seed == 42);
  CHECK_THROWS_AS(cli::apply_seed_override(s, "4x"), ConfigError);
}

TEST_CASE("infeasible timing warns and still runs") {
  Scenario s;
  s.timing.t_request = 10;
  CHECK_FALSE(cli::feasibility_warnings(s).empty());
  CHECK(cli::feasibility_warnings(Scenario{}).empty());

  const std::string path = tmp("slow.json");
  std::ofstream(path) << R"({"timing":{"t_request_us":10}})";
  auto r = invoke({"run", path});
  CHECK(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
}

TEST_CASE("sweep") {
  auto r = invoke({"sweep", kData + "/default.json", "--axis", "n=10,100,1000"});
  REQUIRE(r.code == 0);
  auto rows = lines(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "kind,d,n,height_net,total_runtime_us,toctou_sa_us,attest,fail,norep");

  auto dedup = invoke({"sweep", kData + "/default.json", "--axis", "n=30,20,30,10", "--threads", "2"});
  REQUIRE(dedup.code == 0);
  rows = lines(dedup.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[1].find(",30,") != std::string::npos);
  CHECK(rows[2].find(",20,") != std::string::npos);
  CHECK(rows[3].find(",10,") != std::string::npos);

  CHECK(invoke({"sweep", kData + "/default.json", "--axis", "n=1,x"}).code == 2);
  CHECK(invoke({"sweep", kData + "/default.json", "--axis", "depth=3"}).code == 2);
  CHECK(invoke({"sweep", kData + "/default.json"}).code == 2);
}

TEST_CASE("sweep: binary tree of a million provers") {
  auto r = invoke({"sweep", kData + "/tree_1e6.json", "--axis", "topo=tree:2"});
  REQUIRE(r.code == 0);
  auto rows = lines(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].rfind("tree,2,1000000,20,", 0) == 0);
  CHECK(rows[1].find(",1000000,0,0") != std::string::npos);
}

TEST_CASE("chain gen and show") {
  const std::string a = tmp("chain_a.txt"), b = tmp("chain_b.txt");
  REQUIRE(invoke({"chain", "gen", "--seed", "c0ffee", "--m", "16", "-o", a}).code == 0);
  REQUIRE(invoke({"chain", "gen", "--seed", "c0ffee", "--m", "16", "-o", b}).code == 0);
  CHECK(slurp(a) == slurp(b));

  auto shown = invoke({"chain", "show", a});
  REQUIRE(shown.code == 0);
  CHECK(lines(shown.out).size() == 16 + 2);

  const std::string text = slurp(a);
  const std::string cut = tmp("chain_cut.txt");
  std::ofstream(cut) << text.substr(0, text.size() / 2);
  CHECK(invoke({"chain", "show", cut}).code == 2);
  CHECK(invoke({"chain", "gen", "--seed", "zz", "--m", "4"}).code == 2);
  CHECK(invoke({"chain", "gen", "--seed", "00", "--m", "0"}).code == 2);
}
