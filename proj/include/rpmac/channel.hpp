#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "rpmac/frame.hpp"
#include "rpmac/random.hpp"
#include "rpmac/topology.hpp"
#include "rpmac/types.hpp"

namespace rpmac {

inline constexpr Micros kPreambleDuration = 512;
inline constexpr Micros kDataFrameDuration = 10'488;

/// Order matters: simultaneous events are sorted by kind, then src, then dst.
enum class EventKind : std::uint8_t { PreambleSent, FrameSent, PreambleHeard, FrameHeard, Collision, TimerExpired };

std::string_view event_kind_name(EventKind kind) noexcept;

struct FrameBody {
  FrameBytes bytes{};
  Direction direction = Direction::downlink;
};

/// Association messages of the CSMA baseline; they have no byte encoding here.
enum class CsmaMessage : std::uint8_t { AssocReq, AssocInd, AssocCnf, AssocRsp };
std::string_view csma_message_name(CsmaMessage msg) noexcept;

using Body = std::variant<std::monostate, PreambleKind, FrameBody, CsmaMessage>;

struct SimEvent {
  Micros time = 0;
  EventKind kind = EventKind::TimerExpired;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;
  Body body;
};

/// Short human summary of an event body: preamble name or frame label.
std::string event_summary(const SimEvent& event);

struct TimingModel {
  double slot_jitter_stddev = 0.0;  // µs, per transmission
  double drift_bound = 0.0;         // |clock rate error| bound per node
};

/// Broadcast medium over a topology. Transmissions are queued with transmit()
/// and resolved together by run_until_idle(): at every receiver, overlapping
/// intervals from its neighbours form a cluster; a lone transmission is
/// delivered unless the link loses it, a larger cluster yields one collision.
/// Propagation delay is zero and there is no capture effect.
class Medium {
 public:
  Medium(const Topology& topology, TimingModel timing, std::uint64_t seed);

  /// Throws unknown-node for a bad src and invalid-config for duration <= 0.
  void transmit(NodeId src, Micros start, Micros duration, Body body);
  void schedule_timer(NodeId node, Micros at);

  /// nominal + round(N(0, stddev)) + the node's drift over (nominal - since).
  Micros jittered_time(NodeId node, Micros nominal, Micros since = 0);

  /// Resolves everything queued; returns the resulting events in order and
  /// appends them to the trace when tracing is enabled.
  std::vector<SimEvent> run_until_idle();

  /// Called for each would-be delivery; returning true drops it as lost.
  using DropFilter = std::function<bool(const SimEvent&)>;
  void set_drop_filter(DropFilter filter) { drop_filter_ = std::move(filter); }

  void set_trace_enabled(bool on) { trace_enabled_ = on; }
  const std::vector<SimEvent>& trace() const { return trace_; }
  void clear_trace() { trace_.clear(); }

  const Topology& topology() const { return topology_; }
  const TimingModel& timing() const { return timing_; }
  Micros now() const { return now_; }

 private:
  struct Pending {
    NodeId src;
    Micros start;
    Micros end;
    Body body;
    std::uint64_t seq;
  };

  const Topology& topology_;
  TimingModel timing_;
  Rng rng_;
  std::vector<double> drift_;
  std::vector<Pending> pending_;
  std::vector<SimEvent> timers_;
  std::vector<SimEvent> trace_;
  DropFilter drop_filter_;
  bool trace_enabled_ = false;
  Micros now_ = 0;
  std::uint64_t seq_ = 0;
};

/// time_us,kind,src,dst,summary
void write_trace_csv(std::ostream& out, const std::vector<SimEvent>& trace);
/// One hex-dump line per frame-sent event.
void write_hexdump(std::ostream& out, const std::vector<SimEvent>& trace);

}  // namespace rpmac
