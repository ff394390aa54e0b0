#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "rpmac/types.hpp"

namespace rpmac {

enum class Protocol : std::uint8_t { RPmac, PMac, Csma };

std::string_view protocol_name(Protocol protocol) noexcept;
/// Accepts R-PMAC, P-MAC, CSMA and IEEE1901.1 (case-insensitive).
Protocol parse_protocol(std::string_view text);

/// Slot times; defaults are the published PHY configuration.
struct TimingTable {
  Micros pte_slot = 600;
  Micros csma_slot = 20'000;
  Micros data_slot = 20'000;
};

/// Expected PTE slots to admit N nodes: 4N.
std::uint64_t expected_pte_slots(std::uint64_t nodes);

/// Expected CSMA contention slots: N/p. Throws invalid-probability unless 0 < p <= 1.
double expected_csma_slots(std::uint64_t nodes, double p);

/// Expected networking time in microseconds. `p` is only read for CSMA.
double expected_networking_time(Protocol protocol, std::uint64_t nodes, double p, const TimingTable& timing);

/// Microseconds held as hundredths so the frame-duration formula is exact.
struct CentiMicros {
  std::int64_t hundredths = 0;
  auto operator<=>(const CentiMicros&) const = default;
  double value() const { return static_cast<double>(hundredths) / 100.0; }
  std::string to_string() const;  // "12555.84"
};

/// OFDM frame duration for Nb coded bits over Nc subcarriers:
/// 40.96(13+Ns) + 18.32*2 + 10.8(Ns-2) with Ns = ceil(Nb/Nc).
CentiMicros ieee1901_frame_duration(std::uint64_t bits, std::uint64_t subcarriers);

/// Durations quoted for the IEEE1901.1 beacon and association messages; the
/// formula above does not reproduce them, and the simulator uses slot times instead.
inline constexpr Micros kQuotedBeaconDuration = 9'102;
inline constexpr Micros kQuotedMessageDuration = 17'488;

/// Mean X/N over `trials` runs of the round-based PTE contention model:
/// each round the remaining nodes pick uniformly among M slots, nodes alone in
/// their slot succeed, the rest retry; X counts M slots per round.
double monte_carlo_pte(std::uint64_t nodes, std::uint64_t slots, std::uint64_t trials, std::uint64_t seed);

}  // namespace rpmac
