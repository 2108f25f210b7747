#include "train_cli/commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "train/crypto.hpp"
#include "train/metrics.hpp"
#include "train_cli/config.hpp"

namespace train::cli {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : Error {
  using Error::Error;
};

json ids(const std::vector<NodeId>& v) { return json(v); }

json instance_json(const InstanceRecord& inst) {
  const InstanceMetrics m = instance_metrics(inst);
  json j;
  j["instance"] = inst.index;
  j["hash_ind"] = inst.hash_ind;
  j["tally"] = {{"attest", ids(inst.tally.attest)},
                {"fail", ids(inst.tally.fail)},
                {"norep", ids(inst.tally.norep)},
                {"t_attest", inst.t_attest},
                {"toctou_sa_us", m.toctou_sa_us}};
  j["metrics"] = {{"toctou_sa_us", m.toctou_sa_us},
                  {"total_runtime_us", m.total_runtime_us},
                  {"strawman_toctou_us", m.strawman_toctou_us},
                  {"height_net", inst.height_net},
                  {"initiated_at_us", inst.initiated_at},
                  {"tallied_at_us", inst.tallied_at}};
  j["renewal"] = std::string(to_string(inst.renewal));
  return j;
}

Scenario prepared(const std::string& path, std::ostream& err) {
  Scenario s = load_config(path);
  apply_seed_override(s, std::getenv("TRAIN_SEED"));
  for (const auto& w : feasibility_warnings(s)) err << "warning: " << w << '\n';
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError(path + ": cannot open for writing");
  return f;
}

int cmd_run(const std::string& config, const std::string& trace_path,
            const std::string& sidecar_path, std::ostream& out, std::ostream& err) {
  Scenario s = prepared(config, err);
  s.record_events = !trace_path.empty();
  const EventTrace trace = run(s);
  for (const auto& inst : trace.instances) out << instance_json(inst).dump() << '\n';
  if (!trace_path.empty()) {
    auto f = open_out(trace_path);
    write_trace(f, trace);
  }
  if (!sidecar_path.empty()) {
    auto f = open_out(sidecar_path);
    write_sidecar(f, trace);
  }
  return kOk;
}

int cmd_sweep(const std::string& config, const std::string& axis_text, unsigned threads,
              const std::string& out_path, std::ostream& out, std::ostream& err) {
  const Scenario s = prepared(config, err);
  SweepAxis axis;
  try {
    axis = SweepAxis::parse(axis_text);
  } catch (const InvalidParameter& e) {
    throw UsageError(std::string("--axis: ") + e.what());
  }
  const auto rows = sweep(s, axis, threads);
  if (out_path.empty()) {
    write_csv(out, rows);
  } else {
    auto f = open_out(out_path);
    write_csv(f, rows);
  }
  return kOk;
}

int cmd_chain_gen(const std::string& seed_hex, std::uint32_t m, const std::string& out_path,
                  std::ostream& out) {
  Bytes seed;
  try {
    seed = from_hex(seed_hex);
  } catch (const InvalidParameter& e) {
    throw UsageError(std::string("--seed: ") + e.what());
  }
  if (m == 0) throw UsageError("--m must be at least 1");
  const HashChain chain = generate_chain(crypto::sha256(seed), m);
  if (out_path.empty()) {
    write_chain(out, chain);
  } else {
    auto f = open_out(out_path);
    write_chain(f, chain);
  }
  return kOk;
}

int cmd_chain_show(const std::string& path, std::ostream& out) {
  std::ifstream in(path);
  if (!in) throw UsageError(path + ": cannot open");
  HashChain chain = [&] {
    try {
      return read_chain(in);
    } catch (const InvalidParameter& e) {
      throw UsageError(path + ": " + e.what());
    }
  }();
  out << "m=" << chain.length() << '\n';
  for (std::uint32_t i = 0; i <= chain.length(); ++i) out << i << ' ' << chain.link(i).hex() << '\n';
  return kOk;
}

int cmd_trace_show(const std::string& path, std::ostream& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(path + ": cannot open");
  std::vector<EventRecord> records;
  try {
    records = read_trace(in);
  } catch (const MalformedMessage& e) {
    throw UsageError(path + ": " + e.what());
  }
  for (const auto& r : records) {
    json j = {{"time", r.time},
              {"node", r.node},
              {"peer", r.peer},
              {"kind", std::string(to_string(r.kind))},
              {"before", r.state_before},
              {"after", r.state_after},
              {"detail", r.detail}};
    if (r.t_attest_prime != kNoTime) j["t_attest_prime"] = r.t_attest_prime;
    if (r.message) j["message"] = to_hex(*r.message);
    out << j.dump() << '\n';
  }
  return kOk;
}

}  // namespace

int main_with(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"TRAIN network attestation simulator", "train"};
  app.require_subcommand(1);

  std::string config, trace_path, sidecar_path, axis, out_path, seed_hex, chain_file, trace_file;
  unsigned threads = 0;
  std::uint32_t m = 1024;

  auto* run_cmd = app.add_subcommand("run", "Run a scenario and print one JSON line per instance");
  run_cmd->add_option("config", config, "Scenario JSON")->required();
  run_cmd->add_option("--trace", trace_path, "Write the binary event trace here");
  run_cmd->add_option("--sidecar", sidecar_path, "Write per-node attestation times as JSON here");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run one instance per axis point and print CSV");
  sweep_cmd->add_option("config", config, "Base scenario JSON")->required();
  sweep_cmd->add_option("--axis", axis, "n=10,100,... or topo=star,line,tree:2")->required();
  sweep_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  sweep_cmd->add_option("-o,--out", out_path, "CSV output file (default stdout)");

  auto* chain_cmd = app.add_subcommand("chain", "Hash-chain utilities");
  chain_cmd->require_subcommand(1);
  auto* gen_cmd = chain_cmd->add_subcommand("gen", "Generate a chain from a hex seed");
  gen_cmd->add_option("--seed", seed_hex, "Hex seed, hashed into the chain root")->required();
  gen_cmd->add_option("--m", m, "Chain length")->required();
  gen_cmd->add_option("-o,--out", out_path, "Chain file (default stdout)");
  auto* show_cmd = chain_cmd->add_subcommand("show", "List the links of a chain file");
  show_cmd->add_option("file", chain_file)->required();

  auto* trace_cmd = app.add_subcommand("trace", "Trace inspection");
  trace_cmd->require_subcommand(1);
  auto* tshow_cmd = trace_cmd->add_subcommand("show", "Print a binary trace as JSON lines");
  tshow_cmd->add_option("file", trace_file)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(config, trace_path, sidecar_path, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(config, axis, threads, out_path, out, err);
    if (gen_cmd->parsed()) return cmd_chain_gen(seed_hex, m, out_path, out);
    if (show_cmd->parsed()) return cmd_chain_show(chain_file, out);
    if (tshow_cmd->parsed()) return cmd_trace_show(trace_file, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ChainDepleted& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  err << "error: no command\n";
  return kUsage;
}

}  // namespace train::cli
