#include "train/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

namespace train {

namespace {

void require_complete(const InstanceRecord& inst) {
  if (!inst.completed()) {
    throw AnalysisError("instance " + std::to_string(inst.index) + " has no tally");
  }
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::uint32_t parse_u32(std::string_view s, std::string_view what) {
  std::uint32_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw InvalidParameter("malformed " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

TopologySpec parse_topology(std::string_view s) {
  if (s == "star") return {TopologyKind::Star, 0, 2};
  if (s == "line") return {TopologyKind::Line, 0, 2};
  if (s.rfind("tree:", 0) == 0) {
    const std::uint32_t d = parse_u32(s.substr(5), "tree degree");
    if (d < 2 || d > 12) throw InvalidParameter("tree degree must be within 2..12");
    return {TopologyKind::Tree, 0, d};
  }
  throw InvalidParameter("unknown topology '" + std::string(s) + "'");
}

}  // namespace

Micros toctou_sa(const InstanceRecord& inst) {
  require_complete(inst);
  Micros lo = 0;
  Micros hi = 0;
  bool any = false;
  for (const auto& a : inst.attests) {
    if (!a.benign) continue;
    lo = any ? std::min(lo, a.true_time) : a.true_time;
    hi = any ? std::max(hi, a.true_time) : a.true_time;
    any = true;
  }
  return any ? hi - lo : 0;
}

Micros total_runtime(const InstanceRecord& inst) {
  require_complete(inst);
  return inst.tallied_at - inst.initiated_at;
}

Micros strawman_toctou(const InstanceRecord& inst, const std::vector<NodeId>& compromised) {
  require_complete(inst);
  Micros lo = 0;
  Micros hi = 0;
  bool any = false;
  for (const auto& a : inst.accepts) {
    if (std::find(compromised.begin(), compromised.end(), a.id) != compromised.end()) continue;
    lo = any ? std::min(lo, a.time) : a.time;
    hi = any ? std::max(hi, a.time) : a.time;
    any = true;
  }
  return any ? hi - lo : 0;
}

InstanceMetrics instance_metrics(const InstanceRecord& inst) {
  InstanceMetrics m;
  m.instance = inst.index;
  m.toctou_sa_us = toctou_sa(inst);
  m.total_runtime_us = total_runtime(inst);
  std::vector<NodeId> compromised;
  for (const auto& a : inst.attests) {
    if (!a.benign) compromised.push_back(a.id);
  }
  m.strawman_toctou_us = strawman_toctou(inst, compromised);
  m.tally = inst.tally;
  m.per_node_attest_times.reserve(inst.attests.size());
  for (const auto& a : inst.attests) m.per_node_attest_times.emplace_back(a.id, a.true_time);
  return m;
}

SweepAxis SweepAxis::parse(std::string_view text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw InvalidParameter("axis must look like n=... or topo=...");
  }
  const std::string_view key = text.substr(0, eq);
  const std::string_view values = text.substr(eq + 1);
  if (key != "n" && key != "topo") throw InvalidParameter("unknown axis '" + std::string(key) + "'");
  SweepAxis axis;
  if (values.empty()) return key == "topo" ? SweepAxis{Kind::Topology, {}, {}} : axis;
  if (key == "n") {
    axis.kind = Kind::N;
    for (auto part : split(values, ',')) {
      const std::uint32_t n = parse_u32(part, "n value");
      if (n == 0) throw InvalidParameter("n values must be positive");
      if (std::find(axis.n_values.begin(), axis.n_values.end(), n) == axis.n_values.end()) {
        axis.n_values.push_back(n);
      }
    }
  } else if (key == "topo") {
    axis.kind = Kind::Topology;
    for (auto part : split(values, ',')) {
      const TopologySpec spec = parse_topology(part);
      if (std::find(axis.topologies.begin(), axis.topologies.end(), spec) == axis.topologies.end()) {
        axis.topologies.push_back(spec);
      }
    }
  } else {
    throw InvalidParameter("unknown axis '" + std::string(key) + "'");
  }
  return axis;
}

std::size_t SweepAxis::size() const {
  return kind == Kind::N ? n_values.size() : topologies.size();
}

SweepRow sweep_point(const Scenario& scenario) {
  Simulator sim(scenario);
  const EventTrace trace = sim.run();
  const InstanceRecord& inst = trace.instances.front();
  SweepRow row;
  row.kind = std::string(to_string(sim.topology().kind()));
  row.d = sim.topology().degree();
  row.n = sim.topology().n();
  row.height_net = sim.timing().height_net;
  row.total_runtime_us = total_runtime(inst);
  row.toctou_sa_us = toctou_sa(inst);
  row.attest = inst.tally.attest.size();
  row.fail = inst.tally.fail.size();
  row.norep = inst.tally.norep.size();
  return row;
}

std::vector<SweepRow> sweep(const Scenario& base, const SweepAxis& axis, unsigned threads) {
  std::vector<Scenario> points;
  points.reserve(axis.size());
  for (std::size_t i = 0; i < axis.size(); ++i) {
    Scenario s = base;
    s.instances = 1;
    s.record_events = false;
    s.parents.clear();
    if (axis.kind == SweepAxis::Kind::N) {
      s.topology.n = axis.n_values[i];
    } else {
      const std::uint32_t n = s.topology.n;
      s.topology = axis.topologies[i];
      s.topology.n = n;
    }
    points.push_back(std::move(s));
  }

  std::vector<SweepRow> rows(points.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(points.size()));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        rows[i] = sweep_point(points[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.kind << ',' << r.d << ',' << r.n << ',' << r.height_net << ',' << r.total_runtime_us
        << ',' << r.toctou_sa_us << ',' << r.attest << ',' << r.fail << ',' << r.norep << '\n';
  }
}

}  // namespace train
