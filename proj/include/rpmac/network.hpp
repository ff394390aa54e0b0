#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rpmac/analytics.hpp"
#include "rpmac/calibration.hpp"
#include "rpmac/channel.hpp"
#include "rpmac/frame.hpp"
#include "rpmac/random.hpp"
#include "rpmac/sid_pool.hpp"
#include "rpmac/topology.hpp"

namespace rpmac {

struct Robustness {
  bool collision_handling = true;  // Polling stage after Net-Config
  bool retransmission = true;      // resend CCO->D-PCO requests on timeout
};

struct NetworkConfig {
  Protocol protocol = Protocol::RPmac;
  std::uint32_t n_max = 256;  // PTE slots per window
  double p = 0.25;            // CSMA transmit probability per slot
  TimingTable timing;
  TimingModel jitter;
  Robustness robustness;
  std::uint32_t max_retries = 3;
  std::uint32_t max_nc = 100;
  std::uint32_t termination_window = 2;
  std::size_t pair_batch = 12;  // MAC/SID pairs per SDF, TQuery-F and Netconfig-S
  /// A D-PCO candidate is skipped after this many empty PTEs in a row, until
  /// an NC brings no STA online.
  std::uint32_t empty_pte_limit = 1;
  /// Delays of the simulated radios; the CCO recovers tau from them at start-up.
  DelayProfile hardware{100, 90, 30, 20};
  /// Permitted MACs. Unset means every node in the topology.
  std::optional<std::vector<MacAddress>> whitelist;

  /// Throws invalid-config or invalid-probability.
  void validate() const;
};

using Counts = std::map<std::string, std::uint64_t>;

struct NcReport {
  std::uint32_t nc_index = 0;
  std::vector<Sid> newly_online;
  /// Some STA got part-way through joining (REQ heard, SID sent, D-PCO
  /// exchange cut short) without coming online.
  bool unfinished = false;
  Counts frames;     // frame-sent events by label, relays included
  Counts preambles;  // NET / REQ
  Micros start = 0;
  Micros end = 0;
  Micros elapsed() const { return end - start; }
  std::uint64_t data_frames() const;
};

struct RunSummary {
  Protocol protocol = Protocol::RPmac;
  std::size_t stas = 0;
  std::size_t reachable = 0;
  std::size_t layers = 0;
  std::size_t online = 0;
  std::uint32_t ncs = 0;
  Micros networking_time = 0;  // end of the last NC that brought a STA online
  Micros elapsed = 0;          // end of the last NC run
  Counts frames;
  Counts preambles;
  std::uint64_t data_frames = 0;
  double lost_sta_ratio = 0.0;
  std::size_t duplicate_sid_incidents = 0;
  std::size_t state_disagreements = 0;  // NCs after which CCO and STA views differed
  std::size_t abandoned_rounds = 0;
  std::size_t retransmissions = 0;
};

struct RunResult {
  std::vector<NcReport> ncs;
  RunSummary summary;
  std::vector<SimEvent> trace;  // empty unless tracing was requested
};

enum class Role : std::uint8_t { Sta, DPco, IPco };
enum class Phase : std::uint8_t { Idle, Pte, TQuery, NetConfig, Polling, MultiLayer };

struct StaState {
  MacAddress mac;
  Sid sid = 0;
  Sid osid = 0;
  bool online = false;
  Role role = Role::Sta;
  // Contention state of the current PTE, tied to the coordinator that sent NET.
  NodeId coordinator = kNoNode;
  Micros recorded_diff = 0;
  std::optional<std::uint8_t> chosen_slot;
  bool pending_ack = false;
};

struct OnlineSta {
  MacAddress mac;
  Route route;  // downlink hops from the CCO, ending with the STA's own SID
};

struct ReservedSid {
  Sid sid = 0;
  Route route;  // where the STA would sit, ending with `sid`
};

/// What a D-PCO remembers between CCO requests, so repeated requests are
/// answered without redoing finished work.
struct DpcoSession {
  std::vector<std::uint8_t> indexes;  // from its last PTE
  bool tquery_done = false;
  std::vector<MacSid> found;  // (mac, osid) from its T-Query
  std::vector<MacSid> assignments;
  std::optional<std::vector<Sid>> result;  // Netconfig-F contents once Net-Config ran
};

struct CcoState {
  std::set<MacAddress> whitelist;
  SidPool sid_pool{1, 255};
  std::map<Sid, OnlineSta> online;
  std::uint32_t current_nc = 0;
  Phase phase = Phase::Idle;
  std::vector<std::uint8_t> recorded_diffs;
  std::vector<MacSid> pending_mafs;
  std::vector<MacSid> poll_list;
  std::uint32_t cco_counter = 0;
  std::uint32_t retry_count = 0;
  std::deque<Sid> dpco_queue;
  /// Consecutive D-PCO rounds whose PTE found nobody, by candidate MAC.
  std::map<MacAddress, std::uint32_t> empty_ptes;
  /// Final Netconfig-S batches whose Netconfig-F never arrived, by D-PCO SID.
  std::map<Sid, NetconfigS> in_doubt;
  std::map<Sid, std::vector<MacSid>> in_doubt_all;
  /// SIDs sent to STAs that never confirmed, held for the same MAC while
  /// collision handling is on.
  std::map<MacAddress, ReservedSid> reserved;
  Micros tau = 0;  // calibrated correction factor

  std::optional<Sid> sid_of(const MacAddress& mac) const;
};

struct RunHooks {
  /// Forces the 1-based PTE slot picked by `sta` during NC `nc`; nullopt draws it.
  std::function<std::optional<std::uint32_t>(NodeId sta, std::uint32_t nc)> slot_choice;
  Medium::DropFilter drop_filter;
  bool trace = false;
};

/// One simulated network: a CCO at node 0, STAs everywhere else.
class Network {
 public:
  Network(const Topology& topology, NetworkConfig config, std::uint64_t seed, RunHooks hooks = {});

  /// Runs one networking cycle: the CCO's own stages, then, if the CCO heard
  /// no REQ, one round per D-PCO candidate in join order.
  NcReport run_nc();
  /// Repeats NCs until the termination window passes with no new STA and no
  /// open batch or reserved SID, or every whitelisted MAC is online.
  RunResult run();
  bool whitelist_complete() const;

  const CcoState& cco() const { return cco_; }
  const StaState& sta(NodeId id) const { return stas_.at(id); }
  std::size_t size() const { return stas_.size(); }
  const Medium& medium() const { return medium_; }
  Micros now() const { return now_; }
  const std::set<Sid>& duplicate_sids() const { return duplicate_sids_; }
  RunSummary summarize(const std::vector<NcReport>& ncs) const;
  /// STAs believing themselves online that the CCO does not list, or the reverse.
  std::size_t disagreement_count() const;

 private:
  struct Heard {
    NodeId src;
    NodeId dst;
    Micros time;
    DataFrame frame;
  };

  // Transmission helpers; every frame/preamble sent is counted in `report_`.
  void queue_frame(NodeId src, Micros start, const DataFrame& frame, Direction dir);
  void queue_preamble(NodeId src, Micros start, PreambleKind kind);
  std::vector<SimEvent> flush();
  std::vector<Heard> heard_frames(const std::vector<SimEvent>& events, NodeId dst) const;
  std::vector<Heard> heard_frames(const std::vector<SimEvent>& events) const;
  Micros sta_time(NodeId node, Micros nominal, Micros anchor);

  /// Carries a routed frame hop by hop; returns the nodes holding it after the
  /// last hop. `t` advances one data slot per hop.
  std::vector<NodeId> relay(NodeId origin, const DataFrame& frame, Direction dir, Micros& t);

  // Local stages run by a coordinator (the CCO or a D-PCO) with its neighbours.
  std::vector<std::uint8_t> stage_pte(NodeId coord, Micros& t);
  std::vector<MacSid> stage_tquery(NodeId coord, const std::vector<std::uint8_t>& indexes, Micros& t);
  /// Returns the SIDs confirmed by ACK (or Poll response).
  std::vector<Sid> stage_netconfig(NodeId coord, const std::vector<MacSid>& pairs, Micros& t);
  std::vector<Sid> stage_polling(NodeId coord, const std::vector<MacSid>& missing, Micros& t);
  Micros stage_tquery_bound(std::size_t indexes) const;
  Micros stage_netconfig_bound(std::size_t pairs) const;

  // STA reactions.
  void sta_on_net(NodeId sta, NodeId coord, Micros net_end, std::vector<std::pair<NodeId, Micros>>& reqs);
  void sta_adopt(NodeId sta, Sid sid);

  // CCO bookkeeping.
  std::vector<MacSid> cco_assign(const std::vector<MacSid>& mafs);
  void cco_confirm(const std::vector<MacSid>& assigned, const std::vector<Sid>& confirmed, const Route& via);
  bool whitelisted(const MacAddress& mac) const;

  void single_layer_stage();
  /// Polls each STA holding a reserved SID along its route; answers bring it online.
  void reconfirm_reserved();
  void multilayer_round(Sid dpco);
  /// One CCO->D-PCO request and its reply, with retransmission on timeout.
  std::optional<DataFrame> exchange(Sid dpco, const DataFrame& request, Micros allowance);
  std::optional<DataFrame> dpco_handle(NodeId dpco, const DataFrame& request, Micros& t);
  DataFrame tquery_f_batch(const DpcoSession& s, std::size_t from, const Route& up) const;

  void csma_run(NcReport& report);

  NodeId node_of_sid(Sid sid) const;
  Route uplink_route(const Route& downlink) const;

  const Topology& topology_;
  NetworkConfig config_;
  RunHooks hooks_;
  Rng rng_;
  Medium medium_;
  CcoState cco_;
  std::vector<StaState> stas_;
  std::vector<DpcoSession> sessions_;
  std::vector<std::optional<std::uint32_t>> depth_;
  std::map<MacAddress, NodeId> node_by_mac_;
  std::map<Sid, std::set<NodeId>> holders_;
  std::vector<Sid> join_order_;
  std::set<Sid> duplicate_sids_;
  std::size_t disagreements_ = 0;
  std::size_t abandoned_ = 0;
  std::size_t retransmissions_ = 0;
  Micros now_ = 0;
  NcReport report_;
};

RunResult run_networking(const Topology& topology, const NetworkConfig& config, std::uint64_t seed,
                         const RunHooks& hooks = {});

}  // namespace rpmac
