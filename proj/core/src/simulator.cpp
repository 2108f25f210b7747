#include "train/simulator.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <string>
#include <unordered_map>

namespace train {

namespace {

Bytes tagged(std::string_view tag, std::initializer_list<std::uint64_t> words) {
  Bytes out(tag.begin(), tag.end());
  for (std::uint64_t w : words) {
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(w >> shift));
  }
  return out;
}

constexpr NodeId kBroadcast = 0xffffffffu;
constexpr std::uint8_t kNoVerdict = 0xff;

enum class Ev : std::uint8_t { Deliver, Send, AttestTimer, ForwardTimer, Timeout, Inject };

struct Event {
  Micros time;
  Ev kind;
  bool replay;
  NodeId node;
  NodeId peer;
  std::uint32_t gen;
  std::shared_ptr<const Bytes> msg;
};

// Heap entries stay small; payloads live in a slab.
struct Slot {
  Micros time;
  std::uint64_t seq;
  std::uint32_t index;
};

struct Later {
  bool operator()(const Slot& a, const Slot& b) const {
    return a.time != b.time ? a.time > b.time : a.seq > b.seq;
  }
};

double unit_interval(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(span == 0 ? rng() : rng() % span);
}

void validate(const Scenario& s, const Topology& topo) {
  const std::uint32_t n = topo.n();
  if (s.chain_m == 0) throw ConfigError("chain_m must be at least 1");
  for (Micros v : {s.timing.t_request, s.timing.t_hash, s.timing.t_report, s.timing.t_mac,
                   s.timing.t_slack}) {
    if (v < 0) throw ConfigError("timing values must be non-negative");
  }
  if (s.link.latency_us < 0 || s.link.jitter_us < 0) {
    throw ConfigError("link latency and jitter must be non-negative");
  }
  if (s.sync_tolerance && *s.sync_tolerance < 0) throw ConfigError("sync_tolerance must be >= 0");
  if (s.t_max_delay && *s.t_max_delay < 0) throw ConfigError("t_max_delay must be >= 0");
  for (NodeId id : s.compromised) {
    if (id == kVerifierId || id > n) {
      throw ConfigError("compromised id " + std::to_string(id) + " is not a prover");
    }
  }
  if (s.clock.kind == ClockDistribution::Kind::RtcOffset && s.clock.offset_lo > s.clock.offset_hi) {
    throw ConfigError("rtc_offset_us range is inverted");
  }
  if (s.clock.kind == ClockDistribution::Kind::Drift &&
      (s.clock.ppm_lo > s.clock.ppm_hi || s.clock.ppm_lo <= -1e6)) {
    throw ConfigError("drift_ppm range is invalid");
  }
}

Topology make_topology(const Scenario& s) {
  if (!s.parents.empty()) return Topology::from_parents(s.parents);
  try {
    return Topology::build(s.topology);
  } catch (const InvalidParameter& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

std::string_view to_string(Queueing q) { return q == Queueing::Fifo ? "fifo" : "none"; }

Micros LinkModel::transmission(std::size_t bytes) const {
  if (bandwidth_bps == 0) return 0;
  const std::uint64_t bits = static_cast<std::uint64_t>(bytes) * 8;
  return static_cast<Micros>((bits * 1'000'000 + bandwidth_bps - 1) / bandwidth_bps);
}

DeviceKey derive_device_key(std::uint64_t seed, NodeId id) {
  return DeviceKey{crypto::sha256(tagged("device-key", {seed, id}))};
}

Hash derive_lmt(std::uint64_t seed, NodeId id) { return crypto::sha256(tagged("lmt", {seed, id})); }

Hash derive_chain_root(std::uint64_t seed) { return crypto::sha256(tagged("chain-root", {seed})); }

Hash derive_successor_root(const Hash& old_root, std::uint32_t counter) {
  Bytes data(old_root.bytes.begin(), old_root.bytes.end());
  const Bytes tail = tagged("renewal", {counter});
  data.insert(data.end(), tail.begin(), tail.end());
  return crypto::sha256(data);
}

struct Simulator::Impl {
  Scenario sc;
  Topology topo;
  TimingParams timing;
  Verifier verifier;
  std::vector<ProverNode> provers;  // index id - 1
  std::vector<char> compromised;
  Adversary adversary;

  std::priority_queue<Slot, std::vector<Slot>, Later> queue;
  std::vector<Event> slab;
  std::vector<std::uint32_t> free_slots;
  std::uint64_t seq = 0;
  std::mt19937_64 jitter_rng;
  std::unordered_map<std::uint64_t, Micros> busy_until;

  EventTrace trace;
  InstanceRecord* current = nullptr;
  std::uint32_t instance = 0;
  Micros instance_start = 0;
  std::uint32_t renewals = 0;
  bool ran = false;

  Impl(const Scenario& s, Topology t, TimingParams tp, HashChain chain)
      : sc(s),
        topo(std::move(t)),
        timing(tp),
        verifier(std::move(chain), s.variant, tp, s.sync_tolerance.value_or(tp.t_slack)),
        compromised(topo.n() + 1, 0),
        adversary(s.adversary),
        jitter_rng(s.seed ^ 0x9e3779b97f4a7c15ULL) {}

  void push(Micros time, Ev kind, NodeId node, NodeId peer, std::uint32_t gen,
            std::shared_ptr<const Bytes> msg, bool replay = false) {
    std::uint32_t index;
    if (free_slots.empty()) {
      index = static_cast<std::uint32_t>(slab.size());
      slab.push_back(Event{time, kind, replay, node, peer, gen, std::move(msg)});
    } else {
      index = free_slots.back();
      free_slots.pop_back();
      slab[index] = Event{time, kind, replay, node, peer, gen, std::move(msg)};
    }
    queue.push(Slot{time, seq++, index});
  }

  Event pop() {
    const std::uint32_t index = queue.top().index;
    queue.pop();
    free_slots.push_back(index);
    return std::move(slab[index]);
  }

  void record(Micros time, NodeId node, NodeId peer, EventKind kind, std::uint8_t before,
              std::uint8_t after, std::uint8_t detail, Micros t_prime,
              const std::shared_ptr<const Bytes>& msg) {
    if (!sc.record_events) return;
    trace.events.push_back(EventRecord{time, node, peer, kind, before, after, detail, t_prime, msg});
  }

  std::uint8_t node_state(NodeId id) const {
    return id == kVerifierId ? static_cast<std::uint8_t>(verifier.state())
                             : static_cast<std::uint8_t>(provers[id - 1].state());
  }

  Micros link_delay(NodeId from, NodeId to, std::size_t size, Micros now) {
    const Micros tx = sc.link.transmission(size);
    Micros start = now;
    if (sc.link.queueing == Queueing::Fifo) {
      Micros& busy = busy_until[(std::uint64_t{from} << 32) | to];
      start = std::max(now, busy);
      busy = start + tx;
    }
    Micros jitter = 0;
    if (sc.link.jitter_us > 0) jitter = uniform_int(jitter_rng, -sc.link.jitter_us, sc.link.jitter_us);
    return std::max<Micros>(0, start - now + tx + sc.link.latency_us + jitter);
  }

  void transmit(NodeId from, NodeId to, std::shared_ptr<const Bytes> msg, Micros now,
                bool via_adversary) {
    if (!topo.adjacent(from, to)) {
      record(now, from, to, EventKind::Undeliverable, node_state(from), node_state(from), 0, kNoTime,
             msg);
      return;
    }
    Micros extra = 0;
    if (via_adversary && !adversary.empty()) {
      const AdversaryEffect fx =
          adversary.apply(Transit{from, to, instance, now, instance_start, *msg});
      if (fx.rule >= 0) {
        const auto detail = static_cast<std::uint8_t>(fx.rule);
        switch (fx.action) {
          case AdversaryAction::Drop:
            record(now, from, to, EventKind::AdvDrop, 0, 0, detail, kNoTime, msg);
            return;
          case AdversaryAction::Delay:
            record(now, from, to, EventKind::AdvDelay, 0, 0, detail, kNoTime, msg);
            extra = fx.extra_delay;
            break;
          case AdversaryAction::Modify:
            record(now, from, to, EventKind::AdvModify, 0, 0, detail, kNoTime, fx.replaced);
            msg = fx.replaced;
            break;
          case AdversaryAction::Replay: {
            record(now, from, to, EventKind::AdvReplay, 0, 0, detail, kNoTime, msg);
            const Micros at = std::max(*fx.replay_at, now);
            push(at + link_delay(from, to, msg->size(), at), Ev::Deliver, to, from, 0, msg, true);
            break;
          }
          case AdversaryAction::Inject:
            break;
        }
      }
    }
    record(now, from, to, EventKind::Send, node_state(from), node_state(from), 0, kNoTime, msg);
    const Micros arrive = now + extra + link_delay(from, to, msg->size(), now);
    push(arrive, Ev::Deliver, to, from, 0, std::move(msg));
  }

  void broadcast(NodeId from, const std::shared_ptr<const Bytes>& msg, Micros now) {
    if (from != kVerifierId) transmit(from, topo.parent(from), msg, now, true);
    for (NodeId c : topo.children(from)) transmit(from, c, msg, now, true);
  }

  void apply_actions(NodeId id, std::vector<ProverAction>& actions, Micros now,
                     const std::shared_ptr<const Bytes>& incoming) {
    for (auto& action : actions) {
      if (auto* b = std::get_if<BroadcastAction>(&action)) {
        push(now + b->processing, Ev::Send, id, kBroadcast, 0,
             std::make_shared<const Bytes>(encode(b->request)));
      } else if (auto* u = std::get_if<UnicastAction>(&action)) {
        // Forwarded reports travel verbatim.
        auto bytes = incoming ? incoming : std::make_shared<const Bytes>(encode(u->report));
        if (u->processing == 0) {
          transmit(id, u->to, std::move(bytes), now, true);
        } else {
          push(now + u->processing, Ev::Send, id, u->to, 0, std::move(bytes));
        }
      } else if (auto* t = std::get_if<SetTimerAction>(&action)) {
        push(std::max(t->fire_at, now),
             t->timer == TimerKind::Attest ? Ev::AttestTimer : Ev::ForwardTimer, id, id,
             t->generation, nullptr);
      }
    }
  }

  void do_tally(Micros now) {
    const std::uint8_t before = node_state(kVerifierId);
    current->tally = verifier.tally(now);
    current->tallied_at = now;
    current->renewal = verifier.renewal_status();
    record(now, kVerifierId, kVerifierId, EventKind::Tally, before, node_state(kVerifierId),
           static_cast<std::uint8_t>(current->renewal), kNoTime, nullptr);
  }

  void deliver(const Event& ev) {
    const Micros now = ev.time;
    const NodeId id = ev.node;
    const std::uint8_t before = node_state(id);
    const EventKind kind = EventKind::Deliver;

    Message msg;
    try {
      msg = decode(*ev.msg);
    } catch (const Error&) {
      record(now, id, ev.peer, EventKind::Malformed, before, before, kNoVerdict, kNoTime, ev.msg);
      return;
    }

    if (id == kVerifierId) {
      std::uint8_t detail = kNoVerdict;
      if (const auto* rep = std::get_if<AttReport>(&msg)) {
        detail = static_cast<std::uint8_t>(verifier.on_report(*rep, now));
      }
      record(now, id, ev.peer, kind, before, node_state(id), detail, kNoTime, ev.msg);
      if (verifier.complete()) do_tally(now);
      return;
    }

    ProverNode& p = provers[id - 1];
    std::vector<ProverAction> actions;
    std::shared_ptr<const Bytes> forward_bytes;
    if (const auto* req = std::get_if<AttRequest>(&msg)) {
      actions = p.on_request(*req, now);
      switch (p.last_verdict()) {
        case ProverVerdict::Accepted:
        case ProverVerdict::AcceptedFallback:
        case ProverVerdict::AcceptedRenewalSwitch:
        case ProverVerdict::RenewalFailed:
          current->accepts.push_back(AcceptRecord{id, now});
          break;
        default:
          break;
      }
    } else {
      actions = p.on_report(std::get<AttReport>(msg));
      forward_bytes = ev.msg;
    }
    record(now, id, ev.peer, kind, before, node_state(id),
           static_cast<std::uint8_t>(p.last_verdict()), kNoTime, ev.msg);
    apply_actions(id, actions, now, forward_bytes);
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case Ev::Deliver:
        deliver(ev);
        break;
      case Ev::Send:
        if (ev.peer == kBroadcast) {
          broadcast(ev.node, ev.msg, ev.time);
        } else {
          transmit(ev.node, ev.peer, ev.msg, ev.time, true);
        }
        break;
      case Ev::Inject:
        record(ev.time, ev.node, ev.peer, EventKind::AdvInject, 0, 0, static_cast<std::uint8_t>(ev.gen),
               kNoTime, ev.msg);
        transmit(ev.node, ev.peer, ev.msg, ev.time, false);
        break;
      case Ev::AttestTimer: {
        ProverNode& p = provers[ev.node - 1];
        const std::uint8_t before = node_state(ev.node);
        auto actions = p.on_attest_timer(ev.time, ev.gen);
        Micros t_prime = kNoTime;
        for (const auto& a : actions) {
          if (const auto* u = std::get_if<UnicastAction>(&a)) t_prime = u->report.t_attest_prime;
        }
        if (t_prime != kNoTime) {
          current->attests.push_back(
              AttestRecord{ev.node, t_prime, ev.time, compromised[ev.node] == 0});
        }
        record(ev.time, ev.node, ev.node, EventKind::AttestTimer, before, node_state(ev.node),
               static_cast<std::uint8_t>(p.last_verdict()), t_prime, nullptr);
        apply_actions(ev.node, actions, ev.time, nullptr);
        break;
      }
      case Ev::ForwardTimer: {
        ProverNode& p = provers[ev.node - 1];
        const std::uint8_t before = node_state(ev.node);
        p.on_forward_timer(ev.gen);
        record(ev.time, ev.node, ev.node, EventKind::ForwardTimer, before, node_state(ev.node),
               static_cast<std::uint8_t>(p.last_verdict()), kNoTime, nullptr);
        break;
      }
      case Ev::Timeout:
        if (ev.gen == instance && verifier.state() == VerifierState::Collect) {
          record(ev.time, kVerifierId, kVerifierId, EventKind::Timeout, node_state(kVerifierId),
                 node_state(kVerifierId), 0, kNoTime, nullptr);
          do_tally(ev.time);
        }
        break;
    }
  }

  void maybe_plan_renewal() {
    if (!sc.renewal || verifier.renewal_planned()) return;
    const std::int64_t trigger = 2 * std::int64_t{sc.renewal_k} + 1;
    if (verifier.next_index() != trigger) return;
    const Hash root = derive_successor_root(verifier.chain().root(), ++renewals);
    verifier.plan_renewal(HashChain(root, sc.chain_m), sc.renewal_k);
  }

  EventTrace run() {
    if (ran) throw InvalidParameter("a simulator runs once");
    ran = true;
    Micros now = 0;
    trace.instances.reserve(sc.instances);
    for (instance = 0; instance < sc.instances; ++instance) {
      instance_start = now;
      maybe_plan_renewal();
      const std::uint8_t before = node_state(kVerifierId);
      const AttRequest req = verifier.initiate(now);
      trace.instances.push_back(InstanceRecord{});
      current = &trace.instances.back();
      current->index = instance;
      current->hash_ind = req.hash_ind_new;
      current->height_net = timing.height_net;
      current->initiated_at = now;
      current->t_attest = req.t_attest;
      current->timeout_at = verifier.pending()->t_timeout;

      auto bytes = std::make_shared<const Bytes>(encode(req));
      record(now, kVerifierId, kVerifierId, EventKind::Initiate, before, node_state(kVerifierId), 0,
             kNoTime, bytes);
      push(now, Ev::Send, kVerifierId, kBroadcast, 0, bytes);
      push(current->timeout_at, Ev::Timeout, kVerifierId, kVerifierId, instance, nullptr);
      for (auto& inj : adversary.injections(instance, instance_start)) {
        push(std::max(inj.at, now), Ev::Inject, inj.from, inj.to, static_cast<std::uint32_t>(inj.rule),
             inj.bytes);
      }

      while (!queue.empty()) {
        const Event ev = pop();
        now = ev.time;
        dispatch(ev);
      }
      busy_until.clear();
    }
    current = nullptr;
    return std::move(trace);
  }
};

Simulator::Simulator(const Scenario& scenario) {
  Topology topo = make_topology(scenario);
  validate(scenario, topo);

  TimingParams tp = scenario.timing;
  tp.n = topo.n();
  tp.height_net = scenario.height_net.value_or(topo.height_net());

  HashChain chain(derive_chain_root(scenario.seed), scenario.chain_m);
  const ChainPosition anchor = chain.anchor_position();
  impl_ = std::make_unique<Impl>(scenario, std::move(topo), tp, std::move(chain));
  Impl& s = *impl_;

  for (NodeId id : scenario.compromised) s.compromised[id] = 1;

  std::mt19937_64 rng(scenario.seed);
  const Micros max_delay =
      scenario.t_max_delay.value_or(static_cast<Micros>(tp.n) * tp.t_report);
  const std::uint32_t n = s.topo.n();
  s.provers.reserve(n);
  for (NodeId id = 1; id <= n; ++id) {
    ClockModel clock;
    switch (scenario.clock.kind) {
      case ClockDistribution::Kind::Exact:
        break;
      case ClockDistribution::Kind::RtcOffset:
        clock.rtc_offset = uniform_int(rng, scenario.clock.offset_lo, scenario.clock.offset_hi);
        break;
      case ClockDistribution::Kind::Drift:
        clock.drift_ppm = scenario.clock.ppm_lo +
                          unit_interval(rng) * (scenario.clock.ppm_hi - scenario.clock.ppm_lo);
        break;
    }

    ProverConfig cfg;
    cfg.id = id;
    cfg.key = derive_device_key(scenario.seed, id);
    cfg.backend = scenario.backend;
    cfg.lmt = derive_lmt(scenario.seed, id);
    cfg.compromised = s.compromised[id] != 0;
    cfg.clock = clock;
    cfg.position = anchor;
    cfg.chain_m = scenario.chain_m;
    cfg.t_hash = tp.t_hash;
    cfg.t_mac = tp.t_mac;
    cfg.t_request = tp.t_request;
    cfg.t_report = tp.t_report;
    cfg.t_max_delay = max_delay;
    cfg.forward_mode = scenario.forward_mode;
    s.provers.emplace_back(std::move(cfg));

    DeviceRecord rec;
    rec.key = derive_device_key(scenario.seed, id);
    if (scenario.backend == Backend::Rata) rec.lmt = derive_lmt(scenario.seed, id);
    rec.height = s.topo.height(id);
    s.verifier.register_device(id, rec);
  }
}

Simulator::~Simulator() = default;

EventTrace Simulator::run() { return impl_->run(); }
const Topology& Simulator::topology() const { return impl_->topo; }
const Verifier& Simulator::verifier() const { return impl_->verifier; }
const TimingParams& Simulator::timing() const { return impl_->timing; }

const ProverNode& Simulator::prover(NodeId id) const {
  if (id == kVerifierId || id > impl_->provers.size()) {
    throw InvalidParameter("no prover with id " + std::to_string(id));
  }
  return impl_->provers[id - 1];
}

EventTrace run(const Scenario& scenario) { return Simulator(scenario).run(); }

}  // namespace train
