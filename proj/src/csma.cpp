#include <algorithm>

#include "rpmac/network.hpp"

namespace rpmac {

namespace {

constexpr int kHopAttempts = 8;

}  // namespace

// Serialized slotted-access model of the IEEE1901.1 association procedure.
// One unjoined STA next to the network is chosen at random and contends with
// probability p per slot; its request then climbs to the CCO (each relay
// contending in turn), and the indication, confirmation and response follow
// hop by hop. A hop that loses its frame is retried; a join that cannot get
// through is abandoned and the STA tries again later.
void Network::csma_run(NcReport& report) {
  const Micros data_slot = config_.timing.data_slot;
  const Micros csma_slot = config_.timing.csma_slot;
  Micros t = now_;
  std::set<NodeId> rejected;

  const auto contend = [&] {
    std::uint64_t slots = 1;
    while (!rng_.bernoulli(config_.p)) ++slots;
    t += csma_slot * static_cast<Micros>(slots);
  };
  const auto hop = [&](NodeId from, NodeId to, CsmaMessage msg, bool contended) {
    for (int attempt = 0; attempt < kHopAttempts; ++attempt) {
      if (contended) contend();
      medium_.transmit(from, sta_time(from, t, t), kDataFrameDuration, msg);
      ++report_.frames[std::string(csma_message_name(msg))];
      bool ok = false;
      for (const auto& e : flush()) ok = ok || (e.kind == EventKind::FrameHeard && e.src == from && e.dst == to);
      t += data_slot;
      if (ok) return true;
    }
    return false;
  };

  const std::size_t budget = 64 * topology_.size() + 64;
  for (std::size_t step = 0; step < budget; ++step) {
    std::vector<NodeId> eligible;
    for (NodeId n = 1; n < topology_.size(); ++n) {
      if (stas_[n].online || rejected.count(n)) continue;
      for (const auto& nb : topology_.neighbors(n)) {
        if (nb.id == kCcoNode || (stas_[nb.id].online && cco_.online.count(stas_[nb.id].sid))) {
          eligible.push_back(n);
          break;
        }
      }
    }
    if (eligible.empty()) break;
    const NodeId head = eligible[rng_.uniform_int(0, eligible.size() - 1)];

    // Proxy: the online neighbour closest to the CCO.
    NodeId proxy = kNoNode;
    std::size_t best = SIZE_MAX;
    for (const auto& nb : topology_.neighbors(head)) {
      std::size_t d = SIZE_MAX;
      if (nb.id == kCcoNode) {
        d = 0;
      } else if (stas_[nb.id].online && cco_.online.count(stas_[nb.id].sid)) {
        d = cco_.online.at(stas_[nb.id].sid).route.hops.size();
      }
      if (d < best || (d == best && nb.id < proxy)) {
        best = d;
        proxy = nb.id;
      }
    }
    Route via;
    if (proxy != kCcoNode) via = cco_.online.at(stas_[proxy].sid).route;
    std::vector<NodeId> up{head};
    for (auto it = via.hops.rbegin(); it != via.hops.rend(); ++it) up.push_back(node_of_sid(*it));
    up.push_back(kCcoNode);
    std::vector<NodeId> down(up.rbegin(), up.rend());

    const auto path = [&](const std::vector<NodeId>& nodes, CsmaMessage msg, bool contended) {
      for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (!hop(nodes[i], nodes[i + 1], msg, contended)) return false;
      }
      return true;
    };

    if (!path(up, CsmaMessage::AssocReq, true)) continue;
    if (!whitelisted(stas_[head].mac) || cco_.sid_pool.empty()) {
      rejected.insert(head);
      continue;
    }
    if (!path(down, CsmaMessage::AssocInd, false) || !path(up, CsmaMessage::AssocCnf, false) ||
        !path(down, CsmaMessage::AssocRsp, false)) {
      continue;
    }
    const Sid sid = cco_.sid_pool.allocate();
    Route route = via;
    route.hops.push_back(sid);
    cco_.online[sid] = {stas_[head].mac, route};
    sta_adopt(head, sid);
    report.newly_online.push_back(sid);
    join_order_.push_back(sid);
  }
  now_ = t;
}

}  // namespace rpmac
