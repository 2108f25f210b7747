#include "train/trace.hpp"

#include <istream>
#include <ostream>

namespace train {

namespace {

void put_u32(Bytes& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_i64(Bytes& out, std::int64_t v) {
  const auto u = static_cast<std::uint64_t>(v);
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(u >> shift));
}

std::uint64_t get_be(const std::uint8_t* p, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 8) | p[i];
  return v;
}

constexpr std::size_t kRecordHeader = 8 + 4 + 4 + 4 + 8;

}  // namespace

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Initiate:
      return "initiate";
    case EventKind::Send:
      return "send";
    case EventKind::Deliver:
      return "deliver";
    case EventKind::AdvDrop:
      return "adv-drop";
    case EventKind::AdvDelay:
      return "adv-delay";
    case EventKind::AdvModify:
      return "adv-modify";
    case EventKind::AdvReplay:
      return "adv-replay";
    case EventKind::AdvInject:
      return "adv-inject";
    case EventKind::Undeliverable:
      return "undeliverable";
    case EventKind::AttestTimer:
      return "attest-timer";
    case EventKind::ForwardTimer:
      return "forward-timer";
    case EventKind::Timeout:
      return "timeout";
    case EventKind::Tally:
      return "tally";
    case EventKind::Malformed:
      return "malformed";
  }
  return "?";
}

bool EventRecord::operator==(const EventRecord& o) const {
  const bool same_msg = (!message && !o.message) ||
                        (message && o.message && *message == *o.message) ||
                        (message && !o.message && message->empty()) ||
                        (!message && o.message && o.message->empty());
  return time == o.time && node == o.node && peer == o.peer && kind == o.kind &&
         state_before == o.state_before && state_after == o.state_after && detail == o.detail &&
         t_attest_prime == o.t_attest_prime && same_msg;
}

Bytes encode_record(const EventRecord& r) {
  Bytes body;
  body.reserve(kRecordHeader + (r.message ? r.message->size() : 0));
  put_i64(body, r.time);
  put_u32(body, r.node);
  put_u32(body, r.peer);
  body.push_back(static_cast<std::uint8_t>(r.kind));
  body.push_back(r.state_before);
  body.push_back(r.state_after);
  body.push_back(r.detail);
  put_i64(body, r.t_attest_prime);
  if (r.message) body.insert(body.end(), r.message->begin(), r.message->end());
  return body;
}

void write_trace(std::ostream& out, const EventTrace& trace) {
  Bytes frame;
  for (const auto& r : trace.events) {
    const Bytes body = encode_record(r);
    frame.clear();
    put_u32(frame, static_cast<std::uint32_t>(body.size()));
    frame.insert(frame.end(), body.begin(), body.end());
    out.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
  }
}

std::vector<EventRecord> read_trace(std::istream& in) {
  std::vector<EventRecord> records;
  std::uint8_t len_buf[4];
  while (in.read(reinterpret_cast<char*>(len_buf), 4)) {
    const auto len = static_cast<std::size_t>(get_be(len_buf, 4));
    if (len < kRecordHeader) throw MalformedMessage("trace record shorter than its header");
    Bytes body(len);
    if (!in.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(len))) {
      throw MalformedMessage("truncated trace record");
    }
    const std::uint8_t* p = body.data();
    EventRecord r;
    r.time = static_cast<Micros>(get_be(p, 8));
    r.node = static_cast<NodeId>(get_be(p + 8, 4));
    r.peer = static_cast<NodeId>(get_be(p + 12, 4));
    r.kind = static_cast<EventKind>(p[16]);
    r.state_before = p[17];
    r.state_after = p[18];
    r.detail = p[19];
    r.t_attest_prime = static_cast<Micros>(get_be(p + 20, 8));
    if (len > kRecordHeader) {
      r.message = std::make_shared<const Bytes>(body.begin() + kRecordHeader, body.end());
    }
    records.push_back(std::move(r));
  }
  if (in.gcount() != 0) throw MalformedMessage("truncated trace record length");
  return records;
}

void write_sidecar(std::ostream& out, const EventTrace& trace) {
  out << "{\"instances\":[";
  for (std::size_t i = 0; i < trace.instances.size(); ++i) {
    const auto& inst = trace.instances[i];
    if (i) out << ',';
    out << "{\"instance\":" << inst.index << ",\"t_attest\":" << inst.t_attest << ",\"nodes\":[";
    for (std::size_t j = 0; j < inst.attests.size(); ++j) {
      const auto& a = inst.attests[j];
      if (j) out << ',';
      out << "{\"id\":" << a.id << ",\"t_attest_prime\":" << a.t_attest_prime
          << ",\"true_time\":" << a.true_time << ",\"benign\":" << (a.benign ? "true" : "false")
          << '}';
    }
    out << "]}";
  }
  out << "]}\n";
}

}  // namespace train
