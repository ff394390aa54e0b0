#include "rpmac/channel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include "rpmac/error.hpp"

namespace rpmac {

std::string_view event_kind_name(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::PreambleSent: return "preamble-sent";
    case EventKind::FrameSent: return "frame-sent";
    case EventKind::PreambleHeard: return "preamble-heard";
    case EventKind::FrameHeard: return "frame-heard";
    case EventKind::Collision: return "collision";
    case EventKind::TimerExpired: return "timer-expired";
  }
  return "?";
}

std::string_view csma_message_name(CsmaMessage msg) noexcept {
  switch (msg) {
    case CsmaMessage::AssocReq: return "ASSOC-REQ";
    case CsmaMessage::AssocInd: return "ASSOC-IND";
    case CsmaMessage::AssocCnf: return "ASSOC-CNF";
    case CsmaMessage::AssocRsp: return "ASSOC-RSP";
  }
  return "?";
}

std::string event_summary(const SimEvent& event) {
  if (const auto* msg = std::get_if<CsmaMessage>(&event.body)) return std::string(csma_message_name(*msg));
  if (const auto* kind = std::get_if<PreambleKind>(&event.body)) return std::string(preamble_name(*kind));
  if (const auto* frame = std::get_if<FrameBody>(&event.body)) {
    try {
      return std::string(frame_label(decode_frame(frame->bytes, frame->direction)));
    } catch (const Error&) {
      return "corrupt";
    }
  }
  return event.kind == EventKind::Collision ? "collision" : "";
}

Medium::Medium(const Topology& topology, TimingModel timing, std::uint64_t seed)
    : topology_(topology), timing_(timing), rng_(seed), drift_(topology.size(), 0.0) {
  if (timing_.slot_jitter_stddev < 0 || timing_.drift_bound < 0) {
    throw Error(Errc::invalid_config, "timing model values must be non-negative");
  }
  if (timing_.drift_bound > 0) {
    for (auto& d : drift_) d = (2.0 * rng_.uniform01() - 1.0) * timing_.drift_bound;
  }
}

void Medium::transmit(NodeId src, Micros start, Micros duration, Body body) {
  if (src >= topology_.size()) throw Error(Errc::unknown_node, "transmitter " + std::to_string(src));
  if (duration <= 0) throw Error(Errc::invalid_config, "transmission duration must be positive");
  pending_.push_back({src, start, start + duration, std::move(body), seq_++});
}

void Medium::schedule_timer(NodeId node, Micros at) {
  if (node >= topology_.size()) throw Error(Errc::unknown_node, "timer owner " + std::to_string(node));
  timers_.push_back({at, EventKind::TimerExpired, node, node, {}});
}

Micros Medium::jittered_time(NodeId node, Micros nominal, Micros since) {
  double t = static_cast<double>(nominal);
  if (timing_.slot_jitter_stddev > 0) t += rng_.normal(0.0, timing_.slot_jitter_stddev);
  if (node < drift_.size() && drift_[node] != 0.0) t += drift_[node] * static_cast<double>(nominal - since);
  return static_cast<Micros>(std::llround(t));
}

std::vector<SimEvent> Medium::run_until_idle() {
  std::vector<SimEvent> events;
  std::sort(pending_.begin(), pending_.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.start, a.src, a.seq) < std::tie(b.start, b.src, b.seq);
  });

  for (const auto& tx : pending_) {
    const bool is_preamble = std::holds_alternative<PreambleKind>(tx.body);
    events.push_back({tx.start, is_preamble ? EventKind::PreambleSent : EventKind::FrameSent, tx.src, kNoNode, tx.body});
  }

  // Per receiver: the pending transmissions of its neighbours, in start order.
  std::vector<std::vector<const Pending*>> incoming(topology_.size());
  for (const auto& tx : pending_) {
    for (const auto& n : topology_.neighbors(tx.src)) incoming[n.id].push_back(&tx);
  }

  for (NodeId rx = 0; rx < incoming.size(); ++rx) {
    const auto& list = incoming[rx];
    std::size_t i = 0;
    while (i < list.size()) {
      std::size_t j = i + 1;
      Micros cluster_end = list[i]->end;
      while (j < list.size() && list[j]->start < cluster_end) {
        cluster_end = std::max(cluster_end, list[j]->end);
        ++j;
      }
      if (j - i == 1) {
        const Pending& tx = *list[i];
        const bool is_preamble = std::holds_alternative<PreambleKind>(tx.body);
        const LinkParams* link = topology_.link(tx.src, rx);
        const double loss = is_preamble ? link->preamble_loss : link->frame_loss;
        SimEvent heard{tx.end, is_preamble ? EventKind::PreambleHeard : EventKind::FrameHeard, tx.src, rx, tx.body};
        const bool lost = rng_.bernoulli(loss) || (drop_filter_ && drop_filter_(heard));
        if (!lost) events.push_back(std::move(heard));
      } else {
        NodeId first = list[i]->src;
        for (std::size_t k = i; k < j; ++k) first = std::min(first, list[k]->src);
        events.push_back({cluster_end, EventKind::Collision, first, rx, {}});
      }
      i = j;
    }
  }
  pending_.clear();

  events.insert(events.end(), timers_.begin(), timers_.end());
  timers_.clear();

  std::stable_sort(events.begin(), events.end(), [](const SimEvent& a, const SimEvent& b) {
    return std::tie(a.time, a.kind, a.src, a.dst) < std::tie(b.time, b.kind, b.src, b.dst);
  });
  if (!events.empty()) now_ = std::max(now_, events.back().time);
  if (trace_enabled_) trace_.insert(trace_.end(), events.begin(), events.end());
  return events;
}

void write_trace_csv(std::ostream& out, const std::vector<SimEvent>& trace) {
  out << "time_us,kind,src,dst,summary\n";
  const auto id = [](NodeId n) { return n == kNoNode ? std::string("*") : std::to_string(n); };
  for (const auto& e : trace) {
    out << e.time << ',' << event_kind_name(e.kind) << ',' << id(e.src) << ',' << id(e.dst) << ','
        << event_summary(e) << '\n';
  }
}

void write_hexdump(std::ostream& out, const std::vector<SimEvent>& trace) {
  for (const auto& e : trace) {
    const auto* frame = std::get_if<FrameBody>(&e.body);
    if (e.kind != EventKind::FrameSent || !frame) continue;
    out << hexdump_line(e.time, frame->direction, frame->bytes) << '\n';
  }
}

}  // namespace rpmac
