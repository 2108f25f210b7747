#include "train_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace train::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(where, "expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) fail(where.empty() ? k : where + "." + k, "unknown key");
  }
}

std::string join(const std::string& where, const char* key) {
  return where.empty() ? key : where + "." + key;
}

std::int64_t get_int(const json& v, const std::string& where, std::int64_t lo, std::int64_t hi) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  std::int64_t x = 0;
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(hi)) fail(where, "out of range");
    x = static_cast<std::int64_t>(u);
  } else {
    x = v.get<std::int64_t>();
  }
  if (x < lo || x > hi) {
    fail(where, "must be within " + std::to_string(lo) + ".." + std::to_string(hi));
  }
  return x;
}

std::uint32_t get_u32(const json& v, const std::string& where, std::uint32_t lo = 0) {
  return static_cast<std::uint32_t>(get_int(v, where, lo, 0xffffffffLL));
}

Micros get_micros(const json& v, const std::string& where) {
  return get_int(v, where, 0, std::int64_t{1} << 53);
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

std::pair<const json*, const json*> get_range(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) fail(where, "expected [lo, hi]");
  return {&v[0], &v[1]};
}

template <typename F>
auto wrap(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const InvalidParameter& e) {
    fail(where, e.what());
  }
}

void parse_topology(const json& t, Scenario& s) {
  only_keys(t, "topology", {"kind", "degree", "n", "parents"});
  if (t.contains("kind")) {
    const std::string kind = get_string(t["kind"], "topology.kind");
    if (kind == "star") {
      s.topology.kind = TopologyKind::Star;
    } else if (kind == "line") {
      s.topology.kind = TopologyKind::Line;
    } else if (kind == "tree") {
      s.topology.kind = TopologyKind::Tree;
    } else if (kind == "custom") {
      s.topology.kind = TopologyKind::Custom;
    } else {
      fail("topology.kind", "expected star, line, tree or custom");
    }
  }
  if (t.contains("degree")) s.topology.degree = get_u32(t["degree"], "topology.degree");
  if (t.contains("n")) s.topology.n = get_u32(t["n"], "topology.n", 1);
  if (t.contains("parents")) {
    const json& p = t["parents"];
    if (!p.is_array()) fail("topology.parents", "expected an array");
    s.parents.assign(1, kVerifierId);
    for (std::size_t i = 0; i < p.size(); ++i) {
      s.parents.push_back(get_u32(p[i], "topology.parents[" + std::to_string(i) + "]"));
    }
  }
  if (s.topology.kind == TopologyKind::Custom && s.parents.empty()) {
    fail("topology.parents", "required for a custom topology");
  }
  if (!s.parents.empty() && s.topology.kind != TopologyKind::Custom) {
    fail("topology.parents", "only allowed with kind custom");
  }
}

void parse_timing(const json& t, Scenario& s) {
  only_keys(t, "timing",
            {"t_request_us", "t_hash_us", "t_report_us", "t_mac_us", "t_slack_us"});
  if (t.contains("t_request_us")) s.timing.t_request = get_micros(t["t_request_us"], "timing.t_request_us");
  if (t.contains("t_hash_us")) s.timing.t_hash = get_micros(t["t_hash_us"], "timing.t_hash_us");
  if (t.contains("t_report_us")) s.timing.t_report = get_micros(t["t_report_us"], "timing.t_report_us");
  if (t.contains("t_mac_us")) s.timing.t_mac = get_micros(t["t_mac_us"], "timing.t_mac_us");
  if (t.contains("t_slack_us")) s.timing.t_slack = get_micros(t["t_slack_us"], "timing.t_slack_us");
}

void parse_clock(const json& c, Scenario& s) {
  only_keys(c, "clock", {"rtc_offset_us", "drift_ppm"});
  if (c.contains("rtc_offset_us") && c.contains("drift_ppm")) {
    fail("clock", "give either rtc_offset_us or drift_ppm");
  }
  if (c.contains("rtc_offset_us")) {
    auto [lo, hi] = get_range(c["rtc_offset_us"], "clock.rtc_offset_us");
    s.clock.kind = ClockDistribution::Kind::RtcOffset;
    s.clock.offset_lo = get_int(*lo, "clock.rtc_offset_us[0]", -(std::int64_t{1} << 53), std::int64_t{1} << 53);
    s.clock.offset_hi = get_int(*hi, "clock.rtc_offset_us[1]", -(std::int64_t{1} << 53), std::int64_t{1} << 53);
    if (s.clock.offset_lo > s.clock.offset_hi) fail("clock.rtc_offset_us", "lo exceeds hi");
  } else if (c.contains("drift_ppm")) {
    auto [lo, hi] = get_range(c["drift_ppm"], "clock.drift_ppm");
    s.clock.kind = ClockDistribution::Kind::Drift;
    s.clock.ppm_lo = get_number(*lo, "clock.drift_ppm[0]");
    s.clock.ppm_hi = get_number(*hi, "clock.drift_ppm[1]");
    if (s.clock.ppm_lo > s.clock.ppm_hi) fail("clock.drift_ppm", "lo exceeds hi");
    if (s.clock.ppm_lo <= -1e6) fail("clock.drift_ppm", "must exceed -1e6");
  }
}

void parse_link(const json& l, Scenario& s) {
  only_keys(l, "link", {"bandwidth_bps", "latency_us", "jitter_us", "queueing"});
  if (l.contains("bandwidth_bps")) {
    s.link.bandwidth_bps = static_cast<std::uint64_t>(
        get_int(l["bandwidth_bps"], "link.bandwidth_bps", 0, std::int64_t{1} << 40));
  }
  if (l.contains("latency_us")) s.link.latency_us = get_micros(l["latency_us"], "link.latency_us");
  if (l.contains("jitter_us")) s.link.jitter_us = get_micros(l["jitter_us"], "link.jitter_us");
  if (l.contains("queueing")) {
    const std::string q = get_string(l["queueing"], "link.queueing");
    if (q == "none") {
      s.link.queueing = Queueing::None;
    } else if (q == "fifo") {
      s.link.queueing = Queueing::Fifo;
    } else {
      fail("link.queueing", "expected none or fifo");
    }
  }
}

Hash get_hash(const json& v, const std::string& where) {
  const std::string hex = get_string(v, where);
  return wrap(where, [&] { return Hash::from_hex(hex); });
}

AdversaryRule parse_rule(const json& r, const std::string& where) {
  only_keys(r, where,
            {"action", "from", "to", "type", "instance", "id_dev", "id_snd", "max_uses",
             "delay_us", "field", "op", "value", "byte_index", "mask", "at_us", "after_us",
             "payload"});
  AdversaryRule rule;
  if (!r.contains("action")) fail(join(where, "action"), "required");
  rule.action = wrap(join(where, "action"),
                     [&] { return parse_adversary_action(get_string(r["action"], join(where, "action"))); });
  if (r.contains("from")) rule.match.from = get_u32(r["from"], join(where, "from"));
  if (r.contains("to")) rule.match.to = get_u32(r["to"], join(where, "to"));
  if (r.contains("type")) {
    const std::string t = get_string(r["type"], join(where, "type"));
    if (t == "any") {
      rule.match.type = MessageFilter::Any;
    } else if (t == "request") {
      rule.match.type = MessageFilter::Request;
    } else if (t == "report") {
      rule.match.type = MessageFilter::Report;
    } else {
      fail(join(where, "type"), "expected any, request or report");
    }
  }
  if (r.contains("instance")) rule.match.instance = get_u32(r["instance"], join(where, "instance"));
  if (r.contains("id_dev")) rule.match.id_dev = get_u32(r["id_dev"], join(where, "id_dev"));
  if (r.contains("id_snd")) rule.match.id_snd = get_u32(r["id_snd"], join(where, "id_snd"));
  if (r.contains("max_uses")) rule.max_uses = get_u32(r["max_uses"], join(where, "max_uses"));
  if (r.contains("delay_us")) rule.delay_us = get_micros(r["delay_us"], join(where, "delay_us"));
  if (r.contains("field")) {
    rule.field = wrap(join(where, "field"),
                      [&] { return parse_message_field(get_string(r["field"], join(where, "field"))); });
  }
  if (r.contains("op")) {
    rule.op = wrap(join(where, "op"), [&] { return parse_modify_op(get_string(r["op"], join(where, "op"))); });
  }
  if (r.contains("value")) {
    if (r["value"].is_string()) {
      rule.digest = get_hash(r["value"], join(where, "value"));
    } else {
      rule.value = get_int(r["value"], join(where, "value"), INT64_MIN, INT64_MAX);
    }
  }
  if (r.contains("byte_index")) rule.byte_index = get_u32(r["byte_index"], join(where, "byte_index"));
  if (r.contains("mask")) rule.mask = static_cast<std::uint8_t>(get_int(r["mask"], join(where, "mask"), 1, 255));
  if (r.contains("at_us")) rule.at_us = get_micros(r["at_us"], join(where, "at_us"));
  if (r.contains("after_us")) rule.after_us = get_micros(r["after_us"], join(where, "after_us"));
  if (r.contains("payload")) {
    const std::string hex = get_string(r["payload"], join(where, "payload"));
    rule.payload = wrap(join(where, "payload"), [&] { return from_hex(hex); });
  }

  if (rule.action == AdversaryAction::Modify) {
    if (!r.contains("field")) fail(join(where, "field"), "required for modify");
    if (is_digest_field(rule.field) && rule.op == ModifyOp::Add) {
      fail(join(where, "op"), "add does not apply to digest fields");
    }
    if (is_digest_field(rule.field) && rule.op == ModifyOp::Set && !r["value"].is_string()) {
      fail(join(where, "value"), "expected a hex digest");
    }
  }
  if (rule.action == AdversaryAction::Inject) {
    if (!rule.match.from || !rule.match.to) fail(where, "inject needs from and to");
    if (rule.payload.empty()) fail(join(where, "payload"), "required for inject");
  }
  if (rule.action == AdversaryAction::Replay && rule.at_us && rule.after_us) {
    fail(where, "give either at_us or after_us");
  }
  return rule;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace

Scenario parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("line " + std::to_string(line_of(text, e.byte ? e.byte - 1 : 0)) +
                      ": malformed JSON");
  }

  Scenario s;
  s.topology = {TopologyKind::Star, 10, 2};
  only_keys(doc, "",
            {"variant", "topology", "timing", "clock", "backend", "compromised", "adversary",
             "instances", "chain_m", "renewal_k", "renewal", "seed", "link", "height_net",
             "forward_timer", "sync_tolerance_us", "t_max_delay_us"});

  if (doc.contains("variant")) {
    const std::string v = get_string(doc["variant"], "variant");
    if (v == "A") {
      s.variant = Variant::A;
    } else if (v == "B") {
      s.variant = Variant::B;
    } else {
      fail("variant", "expected A or B");
    }
  }
  if (doc.contains("topology")) parse_topology(doc["topology"], s);
  if (doc.contains("timing")) parse_timing(doc["timing"], s);
  if (doc.contains("clock")) parse_clock(doc["clock"], s);
  if (doc.contains("link")) parse_link(doc["link"], s);
  if (doc.contains("backend")) {
    const std::string b = get_string(doc["backend"], "backend");
    if (b == "CASU") {
      s.backend = Backend::Casu;
    } else if (b == "RATA") {
      s.backend = Backend::Rata;
    } else {
      fail("backend", "expected RATA or CASU");
    }
  }
  if (doc.contains("compromised")) {
    const json& c = doc["compromised"];
    if (!c.is_array()) fail("compromised", "expected an array of ids");
    for (std::size_t i = 0; i < c.size(); ++i) {
      s.compromised.push_back(get_u32(c[i], "compromised[" + std::to_string(i) + "]", 1));
    }
  }
  if (doc.contains("adversary")) {
    const json& a = doc["adversary"];
    if (!a.is_array()) fail("adversary", "expected an array of rules");
    for (std::size_t i = 0; i < a.size(); ++i) {
      s.adversary.rules.push_back(parse_rule(a[i], "adversary[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("instances")) s.instances = get_u32(doc["instances"], "instances", 1);
  if (doc.contains("chain_m")) s.chain_m = get_u32(doc["chain_m"], "chain_m", 1);
  if (doc.contains("renewal_k")) s.renewal_k = get_u32(doc["renewal_k"], "renewal_k");
  if (doc.contains("renewal")) {
    if (!doc["renewal"].is_boolean()) fail("renewal", "expected true or false");
    s.renewal = doc["renewal"].get<bool>();
  }
  if (doc.contains("seed")) {
    s.seed = static_cast<std::uint64_t>(get_int(doc["seed"], "seed", 0, INT64_MAX));
  }
  if (doc.contains("height_net")) s.height_net = get_u32(doc["height_net"], "height_net");
  if (doc.contains("forward_timer")) {
    const std::string f = get_string(doc["forward_timer"], "forward_timer");
    if (f == "max_delay") {
      s.forward_mode = ForwardTimerMode::MaxDelay;
    } else if (f == "height_scaled") {
      s.forward_mode = ForwardTimerMode::HeightScaled;
    } else {
      fail("forward_timer", "expected max_delay or height_scaled");
    }
  }
  if (doc.contains("sync_tolerance_us")) {
    s.sync_tolerance = get_micros(doc["sync_tolerance_us"], "sync_tolerance_us");
  }
  if (doc.contains("t_max_delay_us")) s.t_max_delay = get_micros(doc["t_max_delay_us"], "t_max_delay_us");

  return s;
}

Scenario load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_seed_override(Scenario& s, const char* env_value) {
  if (env_value == nullptr || *env_value == '\0') return;
  std::string_view v(env_value);
  int base = 10;
  if (v.starts_with("0x") || v.starts_with("0X")) {
    v.remove_prefix(2);
    base = 16;
  }
  std::uint64_t seed = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), seed, base);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("TRAIN_SEED: not an unsigned integer");
  }
  s.seed = seed;
}

std::vector<std::string> feasibility_warnings(const Scenario& s) {
  std::vector<std::string> out;
  AttRequest probe;
  probe.variant = s.variant;
  const Micros hop = s.link.transmission(encoded_size(probe)) + s.link.latency_us + s.link.jitter_us;
  if (s.timing.t_request < hop) {
    out.push_back("t_request_us=" + std::to_string(s.timing.t_request) +
                  " is below the simulated per-hop request cost of " + std::to_string(hop) +
                  " us; attestation times will drift apart");
  }
  AttReport rep;
  if (s.backend == Backend::Rata) rep.lmt_dev = Hash{};
  const Micros rep_hop = s.link.transmission(encoded_size(rep)) + s.link.latency_us + s.link.jitter_us;
  if (s.timing.t_report < rep_hop) {
    out.push_back("t_report_us=" + std::to_string(s.timing.t_report) +
                  " is below the simulated per-hop report cost of " + std::to_string(rep_hop) +
                  " us; late reports may land in norep");
  }
  return out;
}

}  // namespace train::cli
