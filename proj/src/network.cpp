#include "rpmac/network.hpp"

#include <algorithm>
#include <stdexcept>

#include "rpmac/error.hpp"

namespace rpmac {

namespace {

template <typename T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

void NetworkConfig::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw Error(Errc::invalid_probability, "CSMA p must be in (0, 1]");
  if (n_max == 0 || n_max > 256) throw Error(Errc::invalid_config, "n_max must be in [1, 256]");
  if (timing.pte_slot <= 0 || timing.csma_slot <= 0 || timing.data_slot <= 0) {
    throw Error(Errc::invalid_config, "slot times must be positive");
  }
  if (timing.pte_slot < kPreambleDuration || timing.data_slot < kDataFrameDuration) {
    throw Error(Errc::invalid_config, "slot shorter than the transmission it carries");
  }
  if (jitter.slot_jitter_stddev < 0 || jitter.drift_bound < 0) {
    throw Error(Errc::invalid_config, "jitter values must be non-negative");
  }
  if (empty_pte_limit == 0) throw Error(Errc::invalid_config, "empty_pte_limit must be at least 1");
  if (max_retries == 0) throw Error(Errc::invalid_config, "max_retries must be at least 1");
  if (max_nc == 0 || termination_window == 0) throw Error(Errc::invalid_config, "max_nc and termination_window must be positive");
  if (pair_batch == 0 || pair_batch > sdf_pair_capacity(kMaxRouteHops)) {
    throw Error(Errc::invalid_config, "pair_batch must be in [1, " + std::to_string(sdf_pair_capacity(kMaxRouteHops)) + "]");
  }
  const auto& h = hardware;
  if (h.tx_delay < 0 || h.rx_delay < 0 || h.transport_delay < 0 || h.tau < 0 ||
      h.tau != h.rx_delay + h.transport_delay - h.tx_delay) {
    throw Error(Errc::invalid_config, "hardware delays must be non-negative with tau = R_P + R_M - T_P");
  }
}

std::uint64_t NcReport::data_frames() const {
  std::uint64_t n = 0;
  for (const auto& [label, count] : frames) n += count;
  return n;
}

std::optional<Sid> CcoState::sid_of(const MacAddress& mac) const {
  for (const auto& [sid, entry] : online) {
    if (entry.mac == mac) return sid;
  }
  return std::nullopt;
}

Network::Network(const Topology& topology, NetworkConfig config, std::uint64_t seed, RunHooks hooks)
    : topology_(topology),
      config_(std::move(config)),
      hooks_(std::move(hooks)),
      rng_(Rng::derive(seed, 0)),
      medium_(topology, config_.jitter, Rng::derive(seed, 1).next()),
      stas_(topology.size()),
      sessions_(topology.size()),
      depth_(topology.hop_depths()) {
  config_.validate();
  topology_.validate();
  medium_.set_trace_enabled(hooks_.trace);
  if (hooks_.drop_filter) medium_.set_drop_filter(hooks_.drop_filter);
  for (NodeId id = 0; id < topology_.size(); ++id) {
    stas_[id].mac = topology_.mac(id);
    node_by_mac_[stas_[id].mac] = id;
  }
  if (config_.whitelist) {
    cco_.whitelist.insert(config_.whitelist->begin(), config_.whitelist->end());
  } else {
    for (NodeId id = 1; id < topology_.size(); ++id) cco_.whitelist.insert(stas_[id].mac);
  }
  // Zero-backoff calibration exchange against the simulated radios.
  const auto& h = config_.hardware;
  const CalibrationMeasurement m{h.rx_delay + h.transport_delay + h.tx_delay + h.tau,
                                 h.rx_delay + h.transport_delay + h.tau, h.transport_delay + h.tx_delay};
  cco_.tau = solve_calibration(m).tau;
}

// ---- transmission helpers ------------------------------------------------

void Network::queue_frame(NodeId src, Micros start, const DataFrame& frame, Direction dir) {
  medium_.transmit(src, start, kDataFrameDuration, FrameBody{encode_frame(frame), dir});
  ++report_.frames[std::string(frame_label(frame))];
}

void Network::queue_preamble(NodeId src, Micros start, PreambleKind kind) {
  medium_.transmit(src, start, kPreambleDuration, kind);
  ++report_.preambles[std::string(preamble_name(kind))];
}

std::vector<SimEvent> Network::flush() { return medium_.run_until_idle(); }

std::vector<Network::Heard> Network::heard_frames(const std::vector<SimEvent>& events, NodeId dst) const {
  std::vector<Heard> out;
  for (const auto& e : events) {
    if (e.kind != EventKind::FrameHeard || (dst != kNoNode && e.dst != dst)) continue;
    const auto* body = std::get_if<FrameBody>(&e.body);
    if (!body) continue;
    try {
      out.push_back({e.src, e.dst, e.time, decode_frame(body->bytes, body->direction)});
    } catch (const Error&) {
    }
  }
  return out;
}

std::vector<Network::Heard> Network::heard_frames(const std::vector<SimEvent>& events) const {
  return heard_frames(events, kNoNode);
}

Micros Network::sta_time(NodeId node, Micros nominal, Micros anchor) {
  return node == kCcoNode ? nominal : medium_.jittered_time(node, nominal, anchor);
}

NodeId Network::node_of_sid(Sid sid) const {
  if (sid == kCcoSid) return kCcoNode;
  for (NodeId n = 1; n < stas_.size(); ++n) {
    if (stas_[n].online && stas_[n].sid == sid) return n;
  }
  return kNoNode;
}

Route Network::uplink_route(const Route& downlink) const {
  Route up;
  if (downlink.hops.empty()) return up;
  for (auto it = downlink.hops.rbegin() + 1; it != downlink.hops.rend(); ++it) up.hops.push_back(*it);
  up.hops.push_back(kCcoSid);
  return up;
}

std::vector<NodeId> Network::relay(NodeId origin, const DataFrame& frame, Direction dir, Micros& t) {
  std::vector<NodeId> holders{origin};
  const auto& hops = frame.route.hops;
  for (std::size_t i = 0; i < hops.size() && !holders.empty(); ++i) {
    for (NodeId h : holders) queue_frame(h, sta_time(h, t, t), frame, dir);
    const auto events = flush();
    t += config_.timing.data_slot;
    std::vector<NodeId> next;
    for (const auto& hf : heard_frames(events)) {
      if (!contains(holders, hf.src) || contains(next, hf.dst)) continue;
      const NodeId n = hf.dst;
      const bool match = hops[i] == kCcoSid ? n == kCcoNode
                                            : n != kCcoNode && stas_[n].online && stas_[n].sid == hops[i];
      if (match) next.push_back(n);
    }
    if (i + 1 < hops.size()) {
      for (NodeId n : next) {
        if (n != kCcoNode) stas_[n].role = Role::IPco;
      }
    }
    holders = std::move(next);
  }
  return holders;
}

// ---- STA side --------------------------------------------------------------

void Network::sta_on_net(NodeId sta, NodeId coord, Micros net_end, std::vector<std::pair<NodeId, Micros>>& reqs) {
  auto& s = stas_[sta];
  if (sta == kCcoNode || s.online) return;
  std::uint32_t k = 0;
  if (hooks_.slot_choice) {
    if (auto forced = hooks_.slot_choice(sta, cco_.current_nc)) k = *forced;
  }
  if (k == 0) k = static_cast<std::uint32_t>(rng_.uniform_int(1, config_.n_max));
  s.coordinator = coord;
  s.chosen_slot = static_cast<std::uint8_t>(k - 1);
  s.recorded_diff = static_cast<Micros>(k - 1) * config_.timing.pte_slot;
  reqs.emplace_back(sta, sta_time(sta, net_end + s.recorded_diff, net_end));
}

void Network::sta_adopt(NodeId sta, Sid sid) {
  auto& s = stas_[sta];
  if (s.online && s.sid != sid) holders_[s.sid].erase(sta);
  s.sid = sid;
  s.online = true;
  s.chosen_slot.reset();
  s.coordinator = kNoNode;
  auto& h = holders_[sid];
  h.insert(sta);
  if (h.size() > 1) duplicate_sids_.insert(sid);
}

// ---- local stages ----------------------------------------------------------

std::vector<std::uint8_t> Network::stage_pte(NodeId coord, Micros& t) {
  const Micros net_start = sta_time(coord, t, t);
  const Micros net_end = net_start + kPreambleDuration;
  queue_preamble(coord, net_start, PreambleKind::Net);
  std::vector<std::pair<NodeId, Micros>> reqs;
  for (const auto& e : flush()) {
    const auto* kind = std::get_if<PreambleKind>(&e.body);
    if (e.kind == EventKind::PreambleHeard && e.src == coord && kind && *kind == PreambleKind::Net) {
      sta_on_net(e.dst, coord, e.time, reqs);
    }
  }
  for (const auto& [sta, at] : reqs) queue_preamble(sta, at, PreambleKind::Req);

  std::vector<std::uint8_t> indexes;
  for (const auto& e : flush()) {
    const auto* kind = std::get_if<PreambleKind>(&e.body);
    if (e.kind != EventKind::PreambleHeard || e.dst != coord || !kind || *kind != PreambleKind::Req) continue;
    // What the coordinator's hardware reports includes the send/receive delays.
    const Micros measured = e.time - kPreambleDuration - net_end + 2 * config_.hardware.tau;
    try {
      indexes.push_back(slot_index(correct_time_difference(measured, cco_.tau), config_.timing.pte_slot));
    } catch (const Error&) {
    }
  }
  t = net_start + kPreambleDuration + static_cast<Micros>(config_.n_max) * config_.timing.pte_slot;
  return indexes;
}

std::vector<MacSid> Network::stage_tquery(NodeId coord, const std::vector<std::uint8_t>& indexes, Micros& t) {
  std::vector<MacSid> mafs;
  if (indexes.empty()) return mafs;
  const Micros slot = config_.timing.data_slot;
  const std::size_t listed_count = std::min(indexes.size(), tdf_capacity(0));
  const bool per_sta = config_.protocol == Protocol::PMac;

  // Each TDF announces `listed`; STAs find their index and answer in that slot.
  const auto query = [&](const std::vector<std::uint8_t>& listed, Micros at) {
    queue_frame(coord, sta_time(coord, at, at), DataFrame{Instruction::TQuery, {}, Tdf{listed}}, Direction::downlink);
    for (const auto& hf : heard_frames(flush())) {
      const auto* tdf = std::get_if<Tdf>(&hf.frame.payload);
      auto& s = stas_[hf.dst];
      if (!tdf || hf.src != coord || hf.dst == kCcoNode || s.online || s.coordinator != coord || !s.chosen_slot) continue;
      const auto pos = std::find(tdf->slot_indexes.begin(), tdf->slot_indexes.end(), *s.chosen_slot);
      if (pos == tdf->slot_indexes.end()) {
        if (!per_sta) s.chosen_slot.reset();  // gives up joining in this NC
        continue;
      }
      const Micros tdf_start = hf.time - kDataFrameDuration;
      const Micros nominal = tdf_start + slot * (1 + (pos - tdf->slot_indexes.begin()));
      queue_frame(hf.dst, sta_time(hf.dst, nominal, tdf_start), DataFrame{Instruction::TQuery, {}, Maf{s.mac, s.osid}},
                  Direction::uplink);
      s.chosen_slot.reset();
    }
    for (const auto& hf : heard_frames(flush(), coord)) {
      if (const auto* maf = std::get_if<Maf>(&hf.frame.payload)) {
        const bool dup = std::any_of(mafs.begin(), mafs.end(), [&](const MacSid& m) { return m.mac == maf->mac; });
        if (!dup) mafs.push_back({maf->mac, maf->osid});
      }
    }
  };

  if (per_sta) {
    for (std::size_t i = 0; i < listed_count; ++i) {
      query({indexes[i]}, t);
      t += 2 * slot;
    }
  } else {
    query({indexes.begin(), indexes.begin() + listed_count}, t);
    t += slot * static_cast<Micros>(1 + listed_count);
  }
  return mafs;
}

std::vector<Sid> Network::stage_netconfig(NodeId coord, const std::vector<MacSid>& pairs, Micros& t) {
  std::vector<Sid> confirmed;
  if (pairs.empty()) return confirmed;
  const Micros slot = config_.timing.data_slot;

  const auto collect_acks = [&](const std::vector<SimEvent>& events) {
    for (const auto& hf : heard_frames(events, coord)) {
      const auto* ack = std::get_if<Ack>(&hf.frame.payload);
      if (!ack || contains(confirmed, ack->sid)) continue;
      const bool expected =
          std::any_of(pairs.begin(), pairs.end(), [&](const MacSid& p) { return p.mac == ack->mac && p.sid == ack->sid; });
      if (expected) confirmed.push_back(ack->sid);
    }
  };

  if (config_.protocol == Protocol::PMac) {
    for (const auto& pair : pairs) {
      queue_frame(coord, sta_time(coord, t, t), DataFrame{Instruction::NetConfig, {}, Sdf{1, {pair}}}, Direction::downlink);
      for (const auto& hf : heard_frames(flush())) {
        const auto* sdf = std::get_if<Sdf>(&hf.frame.payload);
        if (!sdf || hf.src != coord || hf.dst == kCcoNode || sdf->pairs.front().mac != stas_[hf.dst].mac) continue;
        sta_adopt(hf.dst, pair.sid);
        const Micros start = hf.time - kDataFrameDuration;
        queue_frame(hf.dst, sta_time(hf.dst, start + slot, start), DataFrame{Instruction::NetConfig, {}, Ack{pair.mac, pair.sid}},
                    Direction::uplink);
      }
      collect_acks(flush());
      t += 2 * slot;
    }
  } else {
    const Micros t0 = t;
    const std::size_t batch = config_.pair_batch;
    const std::size_t sdfs = ceil_div(pairs.size(), batch);
    for (std::size_t j = 0; j < sdfs; ++j) {
      Sdf sdf;
      sdf.end_flag = j + 1 == sdfs ? 1 : 0;
      sdf.pairs.assign(pairs.begin() + j * batch, pairs.begin() + std::min(pairs.size(), (j + 1) * batch));
      queue_frame(coord, sta_time(coord, t0 + slot * j, t0), DataFrame{Instruction::NetConfig, {}, sdf},
                  Direction::downlink);
    }
    // An STA takes its SID from any SDF it hears, but can only place its ACK
    // once the end-flagged SDF tells it where the ACK slots begin.
    std::map<NodeId, std::size_t> position;
    std::set<NodeId> saw_end;
    for (const auto& hf : heard_frames(flush())) {
      const auto* sdf = std::get_if<Sdf>(&hf.frame.payload);
      if (!sdf || hf.src != coord || hf.dst == kCcoNode) continue;
      const auto j = static_cast<std::size_t>((hf.time - kDataFrameDuration - t0 + slot / 2) / slot);
      if (sdf->end_flag) saw_end.insert(hf.dst);
      for (std::size_t k = 0; k < sdf->pairs.size(); ++k) {
        if (sdf->pairs[k].mac != stas_[hf.dst].mac) continue;
        sta_adopt(hf.dst, sdf->pairs[k].sid);
        stas_[hf.dst].pending_ack = true;
        position[hf.dst] = j * batch + k;
      }
    }
    const Micros ack0 = t0 + slot * static_cast<Micros>(sdfs);
    for (const auto& [n, pos] : position) {
      if (!saw_end.count(n)) continue;
      auto& s = stas_[n];
      queue_frame(n, sta_time(n, ack0 + slot * static_cast<Micros>(pos), t0),
                  DataFrame{Instruction::NetConfig, {}, Ack{s.mac, s.sid}}, Direction::uplink);
      s.pending_ack = false;
    }
    collect_acks(flush());
    t = ack0 + slot * static_cast<Micros>(pairs.size());
  }

  if (config_.robustness.collision_handling && confirmed.size() < pairs.size()) {
    std::vector<MacSid> missing;
    for (const auto& p : pairs) {
      if (!contains(confirmed, p.sid)) missing.push_back(p);
    }
    for (Sid sid : stage_polling(coord, missing, t)) confirmed.push_back(sid);
  }
  return confirmed;
}

std::vector<Sid> Network::stage_polling(NodeId coord, const std::vector<MacSid>& missing, Micros& t) {
  const Micros slot = config_.timing.data_slot;
  const Phase saved = cco_.phase;
  if (coord == kCcoNode) {
    cco_.phase = Phase::Polling;
    cco_.poll_list = missing;
  }
  std::vector<Sid> confirmed;
  for (const auto& pair : missing) {
    for (std::uint32_t attempt = 0; attempt < config_.max_retries; ++attempt) {
      queue_frame(coord, sta_time(coord, t, t), DataFrame{Instruction::Poll, {}, Poll{pair.mac, pair.sid}},
                  Direction::downlink);
      for (const auto& hf : heard_frames(flush())) {
        const auto* poll = std::get_if<Poll>(&hf.frame.payload);
        if (!poll || hf.src != coord || hf.dst == kCcoNode || poll->mac != stas_[hf.dst].mac) continue;
        sta_adopt(hf.dst, poll->sid);
        stas_[hf.dst].pending_ack = false;
        const Micros start = hf.time - kDataFrameDuration;
        queue_frame(hf.dst, sta_time(hf.dst, start + slot, start),
                    DataFrame{Instruction::NetConfig, {}, Ack{pair.mac, pair.sid}}, Direction::uplink);
      }
      bool answered = false;
      for (const auto& hf : heard_frames(flush(), coord)) {
        const auto* ack = std::get_if<Ack>(&hf.frame.payload);
        if (ack && ack->mac == pair.mac && ack->sid == pair.sid) answered = true;
      }
      t += 2 * slot;
      if (answered) {
        confirmed.push_back(pair.sid);
        break;
      }
    }
  }
  if (coord == kCcoNode) cco_.phase = saved;
  return confirmed;
}

Micros Network::stage_tquery_bound(std::size_t indexes) const {
  const Micros slot = config_.timing.data_slot;
  const auto listed = static_cast<Micros>(std::min(indexes, tdf_capacity(0)));
  return config_.protocol == Protocol::PMac ? 2 * slot * listed : slot * (1 + listed);
}

Micros Network::stage_netconfig_bound(std::size_t pairs) const {
  const Micros slot = config_.timing.data_slot;
  const auto n = static_cast<Micros>(pairs);
  Micros bound = config_.protocol == Protocol::PMac ? 2 * slot * n
                                                   : slot * static_cast<Micros>(ceil_div(pairs, config_.pair_batch)) + slot * n;
  if (config_.robustness.collision_handling) bound += 2 * slot * n * config_.max_retries;
  return bound;
}

// ---- CCO bookkeeping -------------------------------------------------------

bool Network::whitelisted(const MacAddress& mac) const { return cco_.whitelist.count(mac) > 0; }

std::vector<MacSid> Network::cco_assign(const std::vector<MacSid>& mafs) {
  std::vector<MacSid> out;
  for (const auto& maf : mafs) {
    if (!whitelisted(maf.mac)) continue;
    if (std::any_of(out.begin(), out.end(), [&](const MacSid& p) { return p.mac == maf.mac; })) continue;
    bool pending = false;
    for (const auto& [dpco, batch] : cco_.in_doubt_all) {
      pending = pending || std::any_of(batch.begin(), batch.end(), [&](const MacSid& p) { return p.mac == maf.mac; });
    }
    if (pending) continue;
    if (auto sid = cco_.sid_of(maf.mac)) {
      out.push_back({maf.mac, *sid});
      continue;
    }
    if (auto it = cco_.reserved.find(maf.mac); it != cco_.reserved.end()) {
      out.push_back({maf.mac, it->second.sid});
      continue;
    }
    if (cco_.sid_pool.empty()) break;
    out.push_back({maf.mac, cco_.sid_pool.allocate()});
  }
  return out;
}

void Network::cco_confirm(const std::vector<MacSid>& assigned, const std::vector<Sid>& confirmed, const Route& via) {
  for (const auto& pair : assigned) {
    const auto it = cco_.online.find(pair.sid);
    const bool known = it != cco_.online.end() && it->second.mac == pair.mac;
    if (contains(confirmed, pair.sid)) {
      cco_.reserved.erase(pair.mac);
      if (known) continue;
      Route route = via;
      route.hops.push_back(pair.sid);
      cco_.online[pair.sid] = {pair.mac, route};
      report_.newly_online.push_back(pair.sid);
      join_order_.push_back(pair.sid);
    } else if (!known) {
      // The STA may have taken the SID even though nothing came back.
      if (config_.robustness.collision_handling) {
        Route route = via;
        route.hops.push_back(pair.sid);
        cco_.reserved[pair.mac] = {pair.sid, route};
      } else {
        cco_.sid_pool.release(pair.sid);
      }
    }
  }
}

void Network::single_layer_stage() {
  Micros t = now_;
  cco_.phase = Phase::Pte;
  cco_.recorded_diffs = stage_pte(kCcoNode, t);
  if (!cco_.recorded_diffs.empty()) {
    cco_.phase = Phase::TQuery;
    cco_.pending_mafs = stage_tquery(kCcoNode, cco_.recorded_diffs, t);
    const auto assigned = cco_assign(cco_.pending_mafs);
    cco_.phase = Phase::NetConfig;
    const auto confirmed = stage_netconfig(kCcoNode, assigned, t);
    cco_confirm(assigned, confirmed, Route{});
    if (cco_.pending_mafs.size() < cco_.recorded_diffs.size() || confirmed.size() < assigned.size()) report_.unfinished = true;
  }
  cco_.phase = Phase::Idle;
  now_ = t;
}

void Network::reconfirm_reserved() {
  const auto held = cco_.reserved;
  for (const auto& [mac, r] : held) {
    if (r.route.hops.size() > kMaxRouteHops) continue;
    const auto hops = static_cast<Micros>(r.route.hops.size());
    const Micros timer = 2 * hops * config_.timing.data_slot;
    for (std::uint32_t attempt = 0; attempt < config_.max_retries; ++attempt) {
      Micros t = now_;
      const DataFrame poll{Instruction::Poll, r.route, Poll{mac, r.sid}};
      const auto at = relay(kCcoNode, poll, Direction::downlink, t);
      bool answered = false;
      if (at.size() == 1 && stas_[at.front()].mac == mac) {
        const DataFrame ack{Instruction::NetConfig, uplink_route(r.route), Ack{mac, r.sid}};
        const auto back = relay(at.front(), ack, Direction::uplink, t);
        answered = back.size() == 1 && back.front() == kCcoNode;
      }
      now_ += timer;
      if (answered) {
        Route via = r.route;
        via.hops.pop_back();
        cco_confirm({{mac, r.sid}}, {r.sid}, via);
        break;
      }
    }
  }
}

// ---- driver ----------------------------------------------------------------

NcReport Network::run_nc() {
  report_ = {};
  report_.nc_index = cco_.current_nc;
  report_.start = now_;
  if (config_.protocol == Protocol::Csma) {
    csma_run(report_);
  } else {
    if (!cco_.reserved.empty()) reconfirm_reserved();
    single_layer_stage();
  }
  // D-PCOs get their turn once the CCO's own neighbourhood has gone quiet.
  if (config_.protocol != Protocol::Csma && cco_.recorded_diffs.empty()) {
    // Candidates are the STAs online when the NC started, nearest layers
    // first. STAs joining through a D-PCO wait for the next NC.
    std::vector<Sid> order = join_order_;
    std::stable_sort(order.begin(), order.end(), [&](Sid a, Sid b) {
      const auto da = cco_.online.count(a) ? cco_.online.at(a).route.hops.size() : 0;
      const auto db = cco_.online.count(b) ? cco_.online.at(b).route.hops.size() : 0;
      return da < db;
    });
    cco_.dpco_queue.assign(order.begin(), order.end());
    std::set<Sid> visited;
    while (!cco_.dpco_queue.empty() && !whitelist_complete()) {
      const Sid sid = cco_.dpco_queue.front();
      cco_.dpco_queue.pop_front();
      const auto it = cco_.online.find(sid);
      if (it == cco_.online.end() || !visited.insert(sid).second) continue;
      const auto empty = cco_.empty_ptes.find(it->second.mac);
      if (it->second.route.hops.size() > kMaxRouteHops) continue;
      if (empty != cco_.empty_ptes.end() && empty->second >= config_.empty_pte_limit) continue;
      cco_.phase = Phase::MultiLayer;
      multilayer_round(sid);
      cco_.phase = Phase::Idle;
    }
  }
  report_.end = now_;

  std::set<MacAddress> macs;
  for (const auto& [sid, entry] : cco_.online) {
    if (!macs.insert(entry.mac).second) throw std::logic_error("CCO lists one MAC under two SIDs");
  }
  if (disagreement_count() > 0) ++disagreements_;
  ++cco_.current_nc;
  return report_;
}

RunResult Network::run() {
  RunResult result;
  std::uint32_t idle = 0;
  while (result.ncs.size() < config_.max_nc) {
    result.ncs.push_back(run_nc());
    // Idle means nobody even got part-way; open batches and reserved SIDs
    // also keep the run going until settled.
    const bool open = !cco_.in_doubt.empty() || !cco_.reserved.empty();
    const auto& last = result.ncs.back();
    idle = last.newly_online.empty() && !last.unfinished && !open ? idle + 1 : 0;
    // A PTE can miss everyone under loss; once progress stalls, retired
    // D-PCOs get another try.
    if (last.newly_online.empty()) cco_.empty_ptes.clear();
    if (config_.protocol == Protocol::Csma || idle >= config_.termination_window || whitelist_complete()) break;
  }
  result.summary = summarize(result.ncs);
  result.trace = medium_.trace();
  return result;
}

bool Network::whitelist_complete() const {
  std::size_t listed = 0;
  for (const auto& [sid, entry] : cco_.online) listed += whitelisted(entry.mac) ? 1 : 0;
  return listed == cco_.whitelist.size();
}

std::size_t Network::disagreement_count() const {
  std::set<MacAddress> believed;
  for (NodeId n = 1; n < stas_.size(); ++n) {
    if (stas_[n].online) believed.insert(stas_[n].mac);
  }
  std::set<MacAddress> listed;
  for (const auto& [sid, entry] : cco_.online) listed.insert(entry.mac);
  std::vector<MacAddress> diff;
  std::set_symmetric_difference(believed.begin(), believed.end(), listed.begin(), listed.end(), std::back_inserter(diff));
  return diff.size();
}

RunSummary Network::summarize(const std::vector<NcReport>& ncs) const {
  RunSummary s;
  s.protocol = config_.protocol;
  s.stas = topology_.sta_count();
  std::uint32_t max_depth = 0;
  std::size_t eligible = 0;
  std::size_t lost = 0;
  for (NodeId n = 1; n < topology_.size(); ++n) {
    if (!depth_[n]) continue;
    ++s.reachable;
    max_depth = std::max(max_depth, *depth_[n]);
    if (!whitelisted(stas_[n].mac)) continue;
    ++eligible;
    if (!cco_.sid_of(stas_[n].mac)) ++lost;
  }
  s.layers = max_depth + 1;
  s.online = cco_.online.size();
  s.ncs = static_cast<std::uint32_t>(ncs.size());
  for (const auto& r : ncs) {
    if (!r.newly_online.empty()) s.networking_time = r.end;
    s.elapsed = std::max(s.elapsed, r.end);
    for (const auto& [k, v] : r.frames) s.frames[k] += v;
    for (const auto& [k, v] : r.preambles) s.preambles[k] += v;
    s.data_frames += r.data_frames();
  }
  s.lost_sta_ratio = eligible ? static_cast<double>(lost) / static_cast<double>(eligible) : 0.0;
  s.duplicate_sid_incidents = duplicate_sids_.size();
  s.state_disagreements = disagreements_;
  s.abandoned_rounds = abandoned_;
  s.retransmissions = retransmissions_;
  return s;
}

RunResult run_networking(const Topology& topology, const NetworkConfig& config, std::uint64_t seed, const RunHooks& hooks) {
  Network net(topology, config, seed, hooks);
  return net.run();
}

}  // namespace rpmac
