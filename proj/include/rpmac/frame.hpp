#pragma once

// Fixed-length R-PMAC data frames and the three preamble patterns.
//
// Frame layout (100 bytes):
//
//   [0]      head, always 0x68
//   [1]      valid data length (payload bytes only)
//   [2]      instruction type
//   [3]      route length r (0..8)
//   [4..4+r) hop SIDs, origin to destination
//   ...      payload, then zero padding
//   [99]     XOR of bytes 0..98
//
// Pair lists (SDF, TQuery-F, Netconfig-S) store each pair as 6 MAC octets
// followed by one SID byte, preceded by their fixed prefix fields.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rpmac/types.hpp"

namespace rpmac {

inline constexpr std::size_t kFrameSize = 100;
inline constexpr std::uint8_t kFrameHead = 0x68;
inline constexpr std::size_t kMaxRouteHops = 8;
/// Bytes left for route hops plus payload once head, length, instruction,
/// route-length and tail are accounted for.
inline constexpr std::size_t kRoutePayloadBudget = 95;
inline constexpr std::size_t kMacOctets = 6;
inline constexpr std::size_t kPairBytes = kMacOctets + 1;

using FrameBytes = std::array<std::uint8_t, kFrameSize>;

enum class Instruction : std::uint8_t {
  Pte = 0x0B,
  TQuery = 0x0C,
  NetConfig = 0x0D,
  PteS = 0x10,
  PteF = 0x11,
  TQueryS = 0x12,
  TQueryF = 0x13,
  NetconfigS = 0x14,
  NetconfigF = 0x15,
  Poll = 0x16,
};

std::string_view instruction_name(Instruction instr) noexcept;
std::optional<Instruction> instruction_from_code(std::uint8_t code) noexcept;

/// The codes 0x0B..0x0D are shared by CCO->STA and STA->CCO frames; the
/// receiver tells the decoder which way the frame travelled.
enum class Direction : std::uint8_t { downlink, uplink };

struct MacAddress {
  std::array<std::uint8_t, kMacOctets> octets{};

  auto operator<=>(const MacAddress&) const = default;

  /// Locally administered address derived from a node number.
  static MacAddress from_index(std::uint32_t index);
  /// Parses "aa:bb:cc:dd:ee:ff"; throws Error(config_parse) on bad input.
  static MacAddress parse(std::string_view text);
  std::string to_string() const;
};

struct MacSid {
  MacAddress mac;
  Sid sid = 0;
  bool operator==(const MacSid&) const = default;
};

struct Route {
  std::vector<Sid> hops;
  bool operator==(const Route&) const = default;
};

struct Tdf {
  std::vector<std::uint8_t> slot_indexes;
  bool operator==(const Tdf&) const = default;
};
struct Maf {
  MacAddress mac;
  Sid osid = 0;
  bool operator==(const Maf&) const = default;
};
struct Sdf {
  std::uint8_t end_flag = 1;
  std::vector<MacSid> pairs;
  bool operator==(const Sdf&) const = default;
};
struct Ack {
  MacAddress mac;
  Sid sid = 0;
  bool operator==(const Ack&) const = default;
};
struct PteS {
  bool operator==(const PteS&) const = default;
};
struct PteF {
  std::uint8_t sta_count = 0;
  bool operator==(const PteF&) const = default;
};
struct TQueryS {
  bool operator==(const TQueryS&) const = default;
};
/// Pairs carry the STA's OSID in the SID slot.
struct TQueryF {
  std::uint8_t end_flag = 1;
  std::vector<MacSid> pairs;
  bool operator==(const TQueryF&) const = default;
};
struct NetconfigS {
  std::uint8_t cco_counter = 0;
  std::uint8_t end_flag = 1;
  std::vector<MacSid> pairs;
  bool operator==(const NetconfigS&) const = default;
};
struct NetconfigF {
  std::vector<Sid> sids;
  bool operator==(const NetconfigF&) const = default;
};
struct Poll {
  MacAddress mac;
  Sid sid = 0;
  bool operator==(const Poll&) const = default;
};

using Payload =
    std::variant<Tdf, Maf, Sdf, Ack, PteS, PteF, TQueryS, TQueryF, NetconfigS, NetconfigF, Poll>;

struct DataFrame {
  Instruction instruction = Instruction::TQuery;
  Route route;
  Payload payload;
  bool operator==(const DataFrame&) const = default;
};

std::size_t encoded_payload_size(const Payload& payload);

/// True when `payload` is a legal body for `instr`.
bool payload_matches(Instruction instr, const Payload& payload);

/// Direction a frame with this body travels in the protocol.
Direction payload_direction(const Payload& payload);

std::uint8_t checksum(std::span<const std::uint8_t> bytes);

FrameBytes encode_frame(const DataFrame& frame);
DataFrame decode_frame(std::span<const std::uint8_t> bytes, Direction direction);

// Capacities implied by the byte budget for a given route length.
std::size_t tdf_capacity(std::size_t route_len);
std::size_t netconfig_f_capacity(std::size_t route_len);
std::size_t sdf_pair_capacity(std::size_t route_len);
std::size_t tquery_f_pair_capacity(std::size_t route_len);
std::size_t netconfig_s_pair_capacity(std::size_t route_len);

/// Frame label used in counters and traces (TDF, MAF, SDF, ...).
std::string_view frame_label(const DataFrame& frame);

// ---- hex-dump log -------------------------------------------------------

/// "<time_us> <DL|UL> <200 lowercase hex chars>"
std::string hexdump_line(Micros time, Direction direction, const FrameBytes& bytes);

struct HexdumpRecord {
  Micros time = 0;
  Direction direction = Direction::downlink;
  FrameBytes bytes{};
};
HexdumpRecord parse_hexdump_line(std::string_view line);

// ---- preambles ----------------------------------------------------------

enum class Symbol : std::uint8_t { S, Z };
enum class PreambleKind : std::uint8_t { Req, Net, Dat };

using PreamblePattern = std::array<Symbol, 5>;

std::string_view preamble_name(PreambleKind kind) noexcept;
PreamblePattern preamble_pattern(PreambleKind kind) noexcept;
std::optional<PreambleKind> classify_preamble(std::span<const Symbol> symbols) noexcept;

}  // namespace rpmac
