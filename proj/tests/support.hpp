#pragma once
// Random valid frames for property tests.

#include <cstdint>

#include "rpmac/frame.hpp"
#include "rpmac/random.hpp"

namespace rpmac::test {

inline MacAddress random_mac(Rng& rng) {
  MacAddress m;
  for (auto& o : m.octets) o = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return m;
}

inline std::vector<MacSid> random_pairs(Rng& rng, std::size_t max) {
  std::vector<MacSid> pairs(rng.uniform_int(0, max));
  for (auto& p : pairs) p = {random_mac(rng), static_cast<Sid>(rng.uniform_int(0, 255))};
  return pairs;
}

inline std::uint8_t flag(Rng& rng) { return static_cast<std::uint8_t>(rng.uniform_int(0, 1)); }

inline std::uint8_t byte(Rng& rng) { return static_cast<std::uint8_t>(rng.uniform_int(0, 255)); }

/// Any of the eleven payload kinds, with a random route that leaves room for it.
inline DataFrame random_frame(Rng& rng) {
  DataFrame f;
  const std::size_t r = rng.uniform_int(0, kMaxRouteHops);
  for (std::size_t i = 0; i < r; ++i) f.route.hops.push_back(byte(rng));
  switch (rng.uniform_int(0, 10)) {
    case 0: {
      Tdf t;
      t.slot_indexes.resize(rng.uniform_int(0, tdf_capacity(r)));
      for (auto& s : t.slot_indexes) s = byte(rng);
      f.instruction = Instruction::TQuery;
      f.payload = t;
      break;
    }
    case 1:
      f.instruction = Instruction::TQuery;
      f.payload = Maf{random_mac(rng), byte(rng)};
      break;
    case 2:
      f.instruction = Instruction::NetConfig;
      f.payload = Sdf{flag(rng), random_pairs(rng, sdf_pair_capacity(r))};
      break;
    case 3:
      f.instruction = Instruction::NetConfig;
      f.payload = Ack{random_mac(rng), byte(rng)};
      break;
    case 4:
      f.instruction = Instruction::PteS;
      f.payload = PteS{};
      break;
    case 5:
      f.instruction = Instruction::PteF;
      f.payload = PteF{byte(rng)};
      break;
    case 6:
      f.instruction = Instruction::TQueryS;
      f.payload = TQueryS{};
      break;
    case 7:
      f.instruction = Instruction::TQueryF;
      f.payload = TQueryF{flag(rng), random_pairs(rng, tquery_f_pair_capacity(r))};
      break;
    case 8:
      f.instruction = Instruction::NetconfigS;
      f.payload = NetconfigS{byte(rng), flag(rng), random_pairs(rng, netconfig_s_pair_capacity(r))};
      break;
    case 9: {
      NetconfigF nf;
      nf.sids.resize(rng.uniform_int(0, netconfig_f_capacity(r)));
      for (auto& s : nf.sids) s = byte(rng);
      f.instruction = Instruction::NetconfigF;
      f.payload = nf;
      break;
    }
    default:
      f.instruction = Instruction::Poll;
      f.payload = Poll{random_mac(rng), byte(rng)};
      break;
  }
  return f;
}

}  // namespace rpmac::test
