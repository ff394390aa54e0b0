#include <doctest.h>

#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "rpmac/error.hpp"
#include "rpmac/network.hpp"

using namespace rpmac;

namespace {

struct Sent {
  Micros time;
  NodeId src;
  DataFrame frame;
  FrameBytes bytes;
};

std::vector<Sent> sent_frames(const std::vector<SimEvent>& trace) {
  std::vector<Sent> out;
  for (const auto& e : trace) {
    const auto* body = std::get_if<FrameBody>(&e.body);
    if (e.kind != EventKind::FrameSent || !body) continue;
    out.push_back({e.time, e.src, decode_frame(body->bytes, body->direction), body->bytes});
  }
  return out;
}

std::vector<Sent> of_kind(const std::vector<Sent>& frames, Instruction instr) {
  std::vector<Sent> out;
  for (const auto& s : frames) {
    if (s.frame.instruction == instr) out.push_back(s);
  }
  return out;
}

std::uint64_t count(const Counts& c, const std::string& key) {
  const auto it = c.find(key);
  return it == c.end() ? 0 : it->second;
}

bool all_online(const Network& net) {
  for (NodeId n = 1; n < net.size(); ++n) {
    if (!net.sta(n).online) return false;
  }
  return true;
}

// Node n picks slot n in NC 0 unless told otherwise.
RunHooks distinct_slots() {
  RunHooks h;
  h.slot_choice = [](NodeId sta, std::uint32_t) -> std::optional<std::uint32_t> { return sta; };
  h.trace = true;
  return h;
}

bool is_frame(const SimEvent& e, std::uint8_t code) {
  const auto* body = std::get_if<FrameBody>(&e.body);
  return body && body->bytes[2] == code;
}

}  // namespace

TEST_CASE("two STAs sharing a REQ slot stay out of the first cycle") {
  const auto topo = Topology::star(4);
  RunHooks hooks;
  hooks.trace = true;
  hooks.slot_choice = [](NodeId sta, std::uint32_t nc) -> std::optional<std::uint32_t> {
    if (nc != 0) return std::nullopt;
    const std::uint32_t slots[] = {0, 1, 4, 8, 8};
    return slots[sta];
  };
  Network net(topo, {}, 1, hooks);
  const auto nc0 = net.run_nc();
  CHECK(nc0.newly_online.size() == 2);
  CHECK(net.sta(1).online);
  CHECK(net.sta(2).online);
  CHECK_FALSE(net.sta(3).online);
  CHECK_FALSE(net.sta(4).online);

  std::size_t req_heard = 0, collisions = 0;
  for (const auto& e : net.medium().trace()) {
    if (e.dst != kCcoNode) continue;
    req_heard += e.kind == EventKind::PreambleHeard ? 1 : 0;
    collisions += e.kind == EventKind::Collision ? 1 : 0;
  }
  CHECK(req_heard == 2);
  CHECK(collisions == 1);

  const auto frames = sent_frames(net.medium().trace());
  const auto tdf = of_kind(frames, Instruction::TQuery);
  REQUIRE(!tdf.empty());
  CHECK(std::get<Tdf>(tdf.front().frame.payload).slot_indexes == std::vector<std::uint8_t>{0, 3});

  for (int i = 0; i < 10 && !all_online(net); ++i) net.run_nc();
  CHECK(all_online(net));
  CHECK(net.duplicate_sids().empty());
}

TEST_CASE("no REQ heard means no TDF") {
  Topology topo;
  topo.add_node();
  topo.add_node();  // isolated STA
  Network net(topo, {}, 1);
  const auto nc = net.run_nc();
  CHECK(nc.newly_online.empty());
  CHECK(nc.data_frames() == 0);
  CHECK(count(nc.preambles, "NET") == 1);
}

TEST_CASE("thirteen STAs: one TDF, thirteen MAFs, two SDFs, thirteen ACKs") {
  const auto topo = Topology::star(13);
  Network net(topo, {}, 3, distinct_slots());
  const auto nc = net.run_nc();
  CHECK(nc.newly_online.size() == 13);
  CHECK(count(nc.frames, "TDF") == 1);
  CHECK(count(nc.frames, "MAF") == 13);
  CHECK(count(nc.frames, "SDF") == 2);
  CHECK(count(nc.frames, "ACK") == 13);
  CHECK(nc.data_frames() == 29);

  const auto sdf = of_kind(sent_frames(net.medium().trace()), Instruction::NetConfig);
  std::vector<std::uint8_t> flags;
  for (const auto& s : sdf) {
    if (const auto* p = std::get_if<Sdf>(&s.frame.payload)) flags.push_back(p->end_flag);
  }
  CHECK(flags == std::vector<std::uint8_t>{0, 1});
}

TEST_CASE("P-MAC polls each STA separately") {
  const auto topo = Topology::star(13);
  NetworkConfig cfg;
  cfg.protocol = Protocol::PMac;
  Network net(topo, cfg, 3, distinct_slots());
  const auto nc = net.run_nc();
  CHECK(nc.newly_online.size() == 13);
  for (const char* label : {"TDF", "MAF", "SDF", "ACK"}) CHECK(count(nc.frames, label) == 13);
  CHECK(nc.data_frames() == 4 * 13);
}

TEST_CASE("SIDs are allocated from the bottom of the pool") {
  const auto topo = Topology::star(5);
  Network net(topo, {}, 3, distinct_slots());
  net.run_nc();
  std::set<Sid> sids;
  for (NodeId n = 1; n <= 5; ++n) sids.insert(net.sta(n).sid);
  CHECK(sids == std::set<Sid>{1, 2, 3, 4, 5});
  CHECK(net.cco().sid_pool.ranges() == std::vector<SidRange>{{6, 255}});
}

TEST_CASE("multi-layer networking through a D-PCO") {
  // CCO hears STA1 and STA2; STA1 hears STA3 and STA4; STA4 hears STA5 and STA6.
  Topology topo;
  for (int i = 0; i < 7; ++i) topo.add_node();
  topo.add_link(0, 1);
  topo.add_link(0, 2);
  topo.add_link(1, 3);
  topo.add_link(1, 4);
  topo.add_link(4, 5);
  topo.add_link(4, 6);
  RunHooks hooks = distinct_slots();
  Network net(topo, {}, 5, hooks);

  const auto nc1 = net.run_nc();
  CHECK(std::set<Sid>(nc1.newly_online.begin(), nc1.newly_online.end()) == std::set<Sid>{net.sta(1).sid, net.sta(2).sid});

  const std::size_t mark = net.medium().trace().size();
  const auto nc2 = net.run_nc();
  CHECK(std::set<Sid>(nc2.newly_online.begin(), nc2.newly_online.end()) == std::set<Sid>{net.sta(3).sid, net.sta(4).sid});
  CHECK(net.sta(1).role == Role::DPco);
  const std::vector<SimEvent> nc2_trace(net.medium().trace().begin() + static_cast<std::ptrdiff_t>(mark),
                                        net.medium().trace().end());
  const auto frames = sent_frames(nc2_trace);
  std::map<NodeId, int> pte_f;
  for (const auto& s : of_kind(frames, Instruction::PteF)) pte_f[s.src] = std::get<PteF>(s.frame.payload).sta_count;
  CHECK(pte_f[1] == 2);
  CHECK(pte_f[2] == 0);
  const auto tqf = of_kind(frames, Instruction::TQueryF);
  REQUIRE(tqf.size() == 1);
  CHECK(std::get<TQueryF>(tqf[0].frame.payload).pairs.size() == 2);
  const auto nsf = of_kind(frames, Instruction::NetconfigF);
  REQUIRE(nsf.size() == 1);
  CHECK(std::get<NetconfigF>(nsf[0].frame.payload).sids.size() == 2);

  const auto nc3 = net.run_nc();
  CHECK(std::set<Sid>(nc3.newly_online.begin(), nc3.newly_online.end()) == std::set<Sid>{net.sta(5).sid, net.sta(6).sid});
  CHECK(net.sta(1).role == Role::IPco);
  CHECK(net.sta(4).role == Role::DPco);
  const auto& route = net.cco().online.at(net.sta(6).sid).route;
  CHECK(route.hops == std::vector<Sid>{net.sta(1).sid, net.sta(4).sid, net.sta(6).sid});
  CHECK(all_online(net));
}

TEST_CASE("missing ACKs are recovered by polling") {
  const auto topo = Topology::star(4);
  RunHooks hooks = distinct_slots();
  auto dropped = std::make_shared<std::set<NodeId>>();
  hooks.drop_filter = [dropped](const SimEvent& e) {
    if (e.kind != EventKind::FrameHeard || e.dst != kCcoNode || e.src < 2) return false;
    if (!is_frame(e, static_cast<std::uint8_t>(Instruction::NetConfig))) return false;
    return dropped->insert(e.src).second;
  };
  Network net(topo, {}, 2, hooks);
  const auto nc = net.run_nc();
  CHECK(dropped->size() == 3);
  CHECK(count(nc.frames, "Poll") == 3);
  CHECK(count(nc.frames, "ACK") == 4 + 3);
  CHECK(nc.newly_online.size() == 4);
  CHECK(all_online(net));

  const auto polls = of_kind(sent_frames(net.medium().trace()), Instruction::Poll);
  std::vector<Sid> polled;
  for (const auto& p : polls) polled.push_back(std::get<Poll>(p.frame.payload).sid);
  CHECK(polled == std::vector<Sid>{net.sta(2).sid, net.sta(3).sid, net.sta(4).sid});
}

TEST_CASE("without collision handling a lost ACK leaves the STA believing it is online") {
  const auto topo = Topology::star(2);
  RunHooks hooks = distinct_slots();
  hooks.drop_filter = [](const SimEvent& e) {
    return e.kind == EventKind::FrameHeard && e.dst == kCcoNode && e.src == 2 &&
           is_frame(e, static_cast<std::uint8_t>(Instruction::NetConfig));
  };
  NetworkConfig cfg;
  cfg.robustness = {false, false};
  Network net(topo, cfg, 2, hooks);
  net.run_nc();
  CHECK(net.sta(2).online);
  CHECK(net.cco().online.count(net.sta(2).sid) == 0);
  CHECK(net.disagreement_count() == 1);
}

TEST_CASE("a SID that was never confirmed stays with its STA") {
  const auto topo = Topology::star(3);
  RunHooks hooks = distinct_slots();
  // Everything STA2 sends to the CCO is lost during the first cycle.
  auto cycle = std::make_shared<int>(0);
  hooks.drop_filter = [cycle](const SimEvent& e) {
    return *cycle == 0 && e.kind == EventKind::FrameHeard && e.dst == kCcoNode && e.src == 2 &&
           is_frame(e, static_cast<std::uint8_t>(Instruction::NetConfig));
  };
  Network net(topo, {}, 2, hooks);
  const auto first = net.run_nc();
  CHECK(first.newly_online.size() == 2);
  CHECK(first.unfinished);
  CHECK(count(first.frames, "Poll") == 3);
  REQUIRE(net.sta(2).online);
  const Sid held = net.sta(2).sid;
  REQUIRE(net.cco().reserved.count(topo.mac(2)) == 1);
  CHECK(net.cco().reserved.at(topo.mac(2)).sid == held);
  CHECK_FALSE(net.cco().sid_pool.contains(held));

  *cycle = 1;
  const auto second = net.run_nc();
  CHECK(second.newly_online == std::vector<Sid>{held});
  CHECK(net.cco().reserved.empty());
  CHECK(net.disagreement_count() == 0);
  CHECK(net.duplicate_sids().empty());
}

TEST_CASE("an empty PTE retires a D-PCO until progress stalls") {
  // 0 - 1 - 2: STA2 misses the NET of the first D-PCO round.
  Topology topo;
  for (int i = 0; i < 3; ++i) topo.add_node();
  topo.add_link(0, 1);
  topo.add_link(1, 2);
  RunHooks hooks = distinct_slots();
  auto nets = std::make_shared<int>(0);
  hooks.drop_filter = [nets](const SimEvent& e) {
    const auto* kind = std::get_if<PreambleKind>(&e.body);
    return e.kind == EventKind::PreambleHeard && e.src == 1 && e.dst == 2 && kind && *kind == PreambleKind::Net &&
           ++*nets == 1;
  };
  Network net(topo, {}, 3, hooks);
  const auto result = net.run();
  CHECK(all_online(net));
  REQUIRE(result.ncs.size() >= 3);
  CHECK(result.ncs[1].newly_online.empty());
  CHECK(result.ncs[2].newly_online.size() == 1);
  CHECK(result.summary.lost_sta_ratio == 0.0);
}

TEST_CASE("a lost TQuery-F is regenerated from the CCO counter") {
  // STA1 reaches twenty STAs, which takes two TQuery-F batches.
  Topology topo;
  topo.add_node();
  topo.add_node();
  topo.add_link(0, 1);
  for (int i = 0; i < 20; ++i) topo.add_link(1, topo.add_node());
  RunHooks hooks = distinct_slots();
  auto seen = std::make_shared<int>(0);
  hooks.drop_filter = [seen](const SimEvent& e) {
    if (e.kind != EventKind::FrameHeard || e.dst != kCcoNode) return false;
    if (!is_frame(e, static_cast<std::uint8_t>(Instruction::TQueryF))) return false;
    return ++*seen == 2;
  };
  Network net(topo, {}, 8, hooks);
  net.run_nc();
  const std::size_t mark = net.medium().trace().size();
  const auto nc = net.run_nc();
  CHECK(nc.newly_online.size() == 20);
  CHECK(all_online(net));

  const std::vector<SimEvent> trace(net.medium().trace().begin() + static_cast<std::ptrdiff_t>(mark),
                                    net.medium().trace().end());
  const auto tqf = of_kind(sent_frames(trace), Instruction::TQueryF);
  REQUIRE(tqf.size() == 3);
  CHECK(tqf[1].bytes == tqf[2].bytes);
  CHECK(std::get<TQueryF>(tqf[0].frame.payload).pairs.size() == 12);
  CHECK(std::get<TQueryF>(tqf[1].frame.payload).end_flag == 1);

  const auto ns = of_kind(sent_frames(trace), Instruction::NetconfigS);
  REQUIRE(ns.size() == 3);
  CHECK(ns[0].bytes == ns[1].bytes);
  CHECK(std::get<NetconfigS>(ns[1].frame.payload).cco_counter == 12);
  CHECK(std::get<NetconfigS>(ns[2].frame.payload).cco_counter == 20);
  CHECK(std::get<NetconfigS>(ns[2].frame.payload).end_flag == 1);
  std::size_t timers = 0;
  for (const auto& e : trace) timers += e.kind == EventKind::TimerExpired ? 1 : 0;
  CHECK(timers == 1);
}

TEST_CASE("a D-PCO that never answers is abandoned after three tries") {
  Topology topo;
  for (int i = 0; i < 4; ++i) topo.add_node();
  topo.add_link(0, 1);
  topo.add_link(1, 2);
  topo.add_link(2, 3);
  RunHooks hooks = distinct_slots();
  hooks.drop_filter = [](const SimEvent& e) {
    return e.kind == EventKind::FrameHeard && e.dst == kCcoNode && is_frame(e, static_cast<std::uint8_t>(Instruction::PteF));
  };
  Network net(topo, {}, 8, hooks);
  net.run_nc();
  const auto nc = net.run_nc();
  CHECK(nc.newly_online.empty());
  const auto summary = net.summarize({nc});
  CHECK(summary.abandoned_rounds == 1);
  CHECK(summary.retransmissions == 2);
}

TEST_CASE("non-whitelisted STAs never join") {
  const auto topo = Topology::star(6);
  NetworkConfig cfg;
  cfg.whitelist.emplace();
  for (NodeId n = 1; n <= 6; ++n) {
    if (n != 3) cfg.whitelist->push_back(topo.mac(n));
  }
  const auto result = run_networking(topo, cfg, 4);
  CHECK(result.summary.online == 5);
  CHECK(result.summary.lost_sta_ratio == 0.0);
  for (const auto& [sid, entry] : Network(topo, cfg, 4).cco().online) CHECK(entry.mac != topo.mac(3));
}

TEST_CASE("CSMA joins every STA with four messages") {
  const auto topo = Topology::star(50);
  NetworkConfig cfg;
  cfg.protocol = Protocol::Csma;
  double total = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const auto r = run_networking(topo, cfg, static_cast<std::uint64_t>(s));
    CHECK(r.summary.online == 50);
    CHECK(r.summary.data_frames == 200);
    total += static_cast<double>(r.summary.networking_time);
  }
  const double expect = 50 / 0.25 * 20000 + 4 * 50 * 20000;
  CHECK(total / seeds == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("invariants hold on lossy multi-hop networks") {
  for (auto protocol : {Protocol::RPmac, Protocol::PMac, Protocol::Csma}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto topo = seed % 2 ? Topology::feeder(60, 5, seed) : Topology::random_tree(40, seed);
      topo.set_all_losses(0.05, 0.02);
      NetworkConfig cfg;
      cfg.protocol = protocol;
      Network net(topo, cfg, seed);
      const auto result = net.run();
      CAPTURE(protocol_name(protocol));
      CAPTURE(seed);
      CHECK(net.duplicate_sids().empty());
      CHECK(net.disagreement_count() == 0);
      std::set<MacAddress> macs;
      for (const auto& [sid, entry] : net.cco().online) {
        CHECK(macs.insert(entry.mac).second);
        CHECK_FALSE(net.cco().sid_pool.contains(sid));
        CHECK(entry.route.hops.back() == sid);
        CHECK(entry.route.hops.size() <= kMaxRouteHops);
      }
      for (NodeId n = 1; n < net.size(); ++n) {
        if (!net.sta(n).online) continue;
        REQUIRE(net.cco().online.count(net.sta(n).sid) == 1);
        CHECK(net.cco().online.at(net.sta(n).sid).mac == topo.mac(n));
      }
      CHECK(result.summary.lost_sta_ratio >= 0.0);
      CHECK(result.summary.lost_sta_ratio <= 1.0);
      // Every reachable STA ends up online.
      CHECK(result.summary.lost_sta_ratio == 0.0);
      CHECK(result.summary.networking_time <= result.summary.elapsed);
    }
  }
}

TEST_CASE("SIDs stay unique under heavy loss") {
  for (auto protocol : {Protocol::RPmac, Protocol::PMac}) {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
      auto topo = seed % 2 ? Topology::feeder(80, 6, seed) : Topology::layered(60, 6, seed);
      topo.set_all_losses(0.1, 0.05);
      NetworkConfig cfg;
      cfg.protocol = protocol;
      Network net(topo, cfg, seed);
      net.run();
      CAPTURE(seed);
      CHECK(net.duplicate_sids().empty());
      // A held SID is never also in the pool or listed for another MAC.
      for (const auto& [mac, held] : net.cco().reserved) {
        CHECK_FALSE(net.cco().sid_pool.contains(held.sid));
        CHECK(net.cco().online.count(held.sid) == 0);
      }
    }
  }
}

TEST_CASE("runs are deterministic") {
  auto topo = Topology::feeder(50, 4, 2);
  topo.set_all_losses(0.05, 0.0);
  RunHooks hooks;
  hooks.trace = true;
  const auto a = run_networking(topo, {}, 11, hooks);
  const auto b = run_networking(topo, {}, 11, hooks);
  std::ostringstream ta, tb;
  write_trace_csv(ta, a.trace);
  write_trace_csv(tb, b.trace);
  CHECK(ta.str() == tb.str());
  CHECK(a.summary.networking_time == b.summary.networking_time);
}

TEST_CASE("configuration is validated") {
  const auto topo = Topology::star(2);
  NetworkConfig cfg;
  cfg.p = 0;
  cfg.protocol = Protocol::Csma;
  CHECK_THROWS_AS(Network(topo, cfg, 1), Error);
  cfg = {};
  cfg.n_max = 0;
  CHECK_THROWS_AS(Network(topo, cfg, 1), Error);
  cfg = {};
  cfg.n_max = 300;
  CHECK_THROWS_AS(Network(topo, cfg, 1), Error);
}
