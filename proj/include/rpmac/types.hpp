#pragma once

#include <cstdint>
#include <limits>

namespace rpmac {

/// Simulated time, integer microseconds.
using Micros = std::int64_t;

/// Short ID. 0x00 belongs to the CCO.
using Sid = std::uint8_t;

using NodeId = std::uint32_t;

inline constexpr NodeId kCcoNode = 0;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();
inline constexpr Sid kCcoSid = 0x00;

}  // namespace rpmac
