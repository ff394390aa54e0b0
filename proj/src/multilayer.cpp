#include <algorithm>

#include "rpmac/error.hpp"
#include "rpmac/network.hpp"

namespace rpmac {

std::optional<DataFrame> Network::exchange(Sid dpco, const DataFrame& request, Micros allowance) {
  DataFrame req = request;
  req.route = cco_.online.at(dpco).route;
  const auto hops = static_cast<Micros>(req.route.hops.size());
  const Micros timer = (2 * hops + 1) * config_.timing.data_slot + allowance;
  const std::uint32_t attempts = config_.robustness.retransmission ? config_.max_retries : 1;

  for (cco_.retry_count = 0; cco_.retry_count < attempts; ++cco_.retry_count) {
    if (cco_.retry_count > 0) ++retransmissions_;
    Micros t = now_;
    const auto holders = relay(kCcoNode, req, Direction::downlink, t);
    // Two nodes holding the same SID would answer together and collide.
    if (holders.size() == 1) {
      if (auto reply = dpco_handle(holders.front(), req, t)) {
        const auto back = relay(holders.front(), *reply, Direction::uplink, t);
        if (back.size() == 1 && back.front() == kCcoNode && t <= now_ + timer) {
          now_ = t;
          return reply;
        }
      }
    }
    medium_.schedule_timer(kCcoNode, now_ + timer);
    flush();
    now_ += timer;
  }
  ++abandoned_;
  return std::nullopt;
}

DataFrame Network::tquery_f_batch(const DpcoSession& s, std::size_t from, const Route& up) const {
  const std::size_t batch = std::min(config_.pair_batch, tquery_f_pair_capacity(up.hops.size()));
  TQueryF f;
  from = std::min(from, s.found.size());
  const std::size_t to = std::min(s.found.size(), from + batch);
  f.pairs.assign(s.found.begin() + from, s.found.begin() + to);
  f.end_flag = to >= s.found.size() ? 1 : 0;
  return {Instruction::TQueryF, up, f};
}

std::optional<DataFrame> Network::dpco_handle(NodeId dpco, const DataFrame& request, Micros& t) {
  auto& s = sessions_[dpco];
  stas_[dpco].role = Role::DPco;
  const Route up = uplink_route(request.route);

  if (std::holds_alternative<PteS>(request.payload)) {
    s = {};
    s.indexes = stage_pte(dpco, t);
    const auto count = static_cast<std::uint8_t>(std::min<std::size_t>(s.indexes.size(), 255));
    return DataFrame{Instruction::PteF, up, PteF{count}};
  }
  if (std::holds_alternative<TQueryS>(request.payload)) {
    if (!s.tquery_done) {
      s.found = stage_tquery(dpco, s.indexes, t);
      s.tquery_done = true;
      s.assignments.clear();
      s.result.reset();
    }
    return tquery_f_batch(s, 0, up);
  }
  if (const auto* ns = std::get_if<NetconfigS>(&request.payload)) {
    for (const auto& pair : ns->pairs) {
      auto it = std::find_if(s.assignments.begin(), s.assignments.end(),
                             [&](const MacSid& a) { return a.mac == pair.mac; });
      if (it == s.assignments.end()) {
        s.assignments.push_back(pair);
      } else {
        it->sid = pair.sid;
      }
    }
    // A counter short of what was sent means a TQuery-F went missing.
    if (ns->cco_counter < s.found.size() || !ns->end_flag) return tquery_f_batch(s, ns->cco_counter, up);
    if (!s.result) {
      s.result = stage_netconfig(dpco, s.assignments, t);
      const std::size_t cap = netconfig_f_capacity(up.hops.size());
      if (s.result->size() > cap) s.result->resize(cap);
    }
    return DataFrame{Instruction::NetconfigF, up, NetconfigF{*s.result}};
  }
  return std::nullopt;
}

void Network::multilayer_round(Sid dpco) {
  const Route route = cco_.online.at(dpco).route;
  const MacAddress mac = cco_.online.at(dpco).mac;

  const auto release_unconfirmed = [&](const std::vector<MacSid>& assigned) { cco_confirm(assigned, {}, route); };
  // Batches cut short before Net-Config ran: no STA has seen these SIDs.
  const auto release_unsent = [&](const std::vector<MacSid>& assigned) {
    for (const auto& pair : assigned) {
      const auto it = cco_.online.find(pair.sid);
      const auto held = cco_.reserved.find(pair.mac);
      if (it != cco_.online.end() && it->second.mac == pair.mac) continue;
      if (held != cco_.reserved.end() && held->second.sid == pair.sid) continue;
      cco_.sid_pool.release(pair.sid);
    }
  };

  // Settle a final batch left open by an earlier round before starting over.
  if (auto it = cco_.in_doubt.find(dpco); it != cco_.in_doubt.end()) {
    const auto& all = cco_.in_doubt_all.at(dpco);
    const auto reply = exchange(dpco, DataFrame{Instruction::NetconfigS, {}, it->second}, stage_netconfig_bound(all.size()));
    const auto* f = reply ? std::get_if<NetconfigF>(&reply->payload) : nullptr;
    if (!f) {
      report_.unfinished = true;
      return;
    }
    const auto batch = all;
    cco_.in_doubt.erase(dpco);
    cco_.in_doubt_all.erase(dpco);
    cco_confirm(batch, f->sids, route);
  }

  const Micros pte_window = kPreambleDuration + static_cast<Micros>(config_.n_max) * config_.timing.pte_slot;
  const auto pte = exchange(dpco, DataFrame{Instruction::PteS, {}, PteS{}}, pte_window);
  const auto* pte_f = pte ? std::get_if<PteF>(&pte->payload) : nullptr;
  if (!pte_f) return;
  if (pte_f->sta_count == 0) {
    ++cco_.empty_ptes[mac];
    return;
  }
  cco_.empty_ptes.erase(mac);

  auto reply = exchange(dpco, DataFrame{Instruction::TQueryS, {}, TQueryS{}}, stage_tquery_bound(pte_f->sta_count));
  std::vector<MacSid> all;
  cco_.cco_counter = 0;
  while (true) {
    const auto* tq = reply ? std::get_if<TQueryF>(&reply->payload) : nullptr;
    if (!tq) {
      release_unsent(all);
      report_.unfinished = true;
      return;
    }
    cco_.cco_counter += static_cast<std::uint32_t>(tq->pairs.size());
    std::vector<MacSid> fresh;
    for (const auto& p : tq->pairs) {
      if (std::none_of(all.begin(), all.end(), [&](const MacSid& a) { return a.mac == p.mac; })) fresh.push_back(p);
    }
    const auto assigned = cco_assign(fresh);
    all.insert(all.end(), assigned.begin(), assigned.end());
    const bool end = tq->end_flag != 0;
    if (end && cco_.cco_counter < pte_f->sta_count) report_.unfinished = true;
    if (end && cco_.cco_counter == 0) return;

    NetconfigS ns;
    ns.cco_counter = static_cast<std::uint8_t>(std::min<std::uint32_t>(cco_.cco_counter, 255));
    ns.end_flag = end ? 1 : 0;
    ns.pairs = assigned;
    reply = exchange(dpco, DataFrame{Instruction::NetconfigS, {}, ns}, end ? stage_netconfig_bound(all.size()) : 0);
    if (!end) continue;

    const auto* f = reply ? std::get_if<NetconfigF>(&reply->payload) : nullptr;
    if (f) {
      cco_confirm(all, f->sids, route);
      if (f->sids.size() < all.size()) report_.unfinished = true;
    } else if (config_.robustness.retransmission) {
      // The D-PCO may already have configured these STAs; keep their SIDs.
      cco_.in_doubt[dpco] = ns;
      cco_.in_doubt_all[dpco] = all;
    } else {
      release_unconfirmed(all);
    }
    return;
  }
}

}  // namespace rpmac
