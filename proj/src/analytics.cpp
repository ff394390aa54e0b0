#include "rpmac/analytics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <vector>

#include "rpmac/error.hpp"
#include "rpmac/random.hpp"

namespace rpmac {

std::string_view protocol_name(Protocol protocol) noexcept {
  switch (protocol) {
    case Protocol::RPmac: return "R-PMAC";
    case Protocol::PMac: return "P-MAC";
    case Protocol::Csma: return "CSMA";
  }
  return "?";
}

Protocol parse_protocol(std::string_view text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "r-pmac" || lower == "rpmac") return Protocol::RPmac;
  if (lower == "p-mac" || lower == "pmac") return Protocol::PMac;
  if (lower == "csma" || lower == "ieee1901.1") return Protocol::Csma;
  throw Error(Errc::config_parse, "unknown protocol '" + std::string(text) + "'");
}

std::uint64_t expected_pte_slots(std::uint64_t nodes) { return 4 * nodes; }

namespace {
void check_probability(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(Errc::invalid_probability, "p must be in (0, 1]");
}
}  // namespace

double expected_csma_slots(std::uint64_t nodes, double p) {
  check_probability(p);
  return static_cast<double>(nodes) / p;
}

double expected_networking_time(Protocol protocol, std::uint64_t nodes, double p, const TimingTable& timing) {
  const double n = static_cast<double>(nodes);
  const auto pte = static_cast<double>(expected_pte_slots(nodes)) * static_cast<double>(timing.pte_slot);
  const double data = static_cast<double>(timing.data_slot);
  switch (protocol) {
    case Protocol::Csma:
      return expected_csma_slots(nodes, p) * static_cast<double>(timing.csma_slot) + 4.0 * n * data;
    case Protocol::PMac:
      return pte + 4.0 * n * data;
    case Protocol::RPmac:
      return pte + 2.0 * n * data;
  }
  return 0.0;
}

std::string CentiMicros::to_string() const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%02lld", static_cast<long long>(hundredths / 100),
                static_cast<long long>(hundredths % 100));
  return buf;
}

CentiMicros ieee1901_frame_duration(std::uint64_t bits, std::uint64_t subcarriers) {
  if (bits == 0 || subcarriers == 0) throw Error(Errc::invalid_config, "bits and subcarriers must be positive");
  const auto symbols = static_cast<std::int64_t>((bits + subcarriers - 1) / subcarriers);
  return {4096 * (13 + symbols) + 1832 * 2 + 1080 * (symbols - 2)};
}

double monte_carlo_pte(std::uint64_t nodes, std::uint64_t slots, std::uint64_t trials, std::uint64_t seed) {
  if (nodes == 0 || slots == 0 || trials == 0) throw Error(Errc::invalid_config, "N, M and trials must be positive");
  if (slots == 1 && nodes > 1) throw Error(Errc::invalid_config, "two or more nodes can never separate in one slot");
  std::vector<std::uint32_t> occupancy(slots);
  std::vector<std::uint64_t> picks;
  double total_ratio = 0.0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::derive(seed, trial);
    std::uint64_t remaining = nodes;
    std::uint64_t consumed = 0;
    while (remaining > 0) {
      std::fill(occupancy.begin(), occupancy.end(), 0u);
      picks.resize(remaining);
      for (auto& pick : picks) {
        pick = rng.uniform_int(0, slots - 1);
        ++occupancy[pick];
      }
      const auto winners = static_cast<std::uint64_t>(
          std::count_if(picks.begin(), picks.end(), [&](std::uint64_t s) { return occupancy[s] == 1; }));
      remaining -= winners;
      consumed += slots;
    }
    total_ratio += static_cast<double>(consumed) / static_cast<double>(nodes);
  }
  return total_ratio / static_cast<double>(trials);
}

}  // namespace rpmac
