#include "rpmac/frame.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "rpmac/error.hpp"

namespace rpmac {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::oversize_payload: return "oversize-payload";
    case Errc::oversize_route: return "oversize-route";
    case Errc::bad_head: return "bad-head";
    case Errc::checksum_mismatch: return "checksum-mismatch";
    case Errc::bad_length: return "bad-length";
    case Errc::unknown_instruction: return "unknown-instruction";
    case Errc::malformed_payload: return "malformed-payload";
    case Errc::invalid_range: return "invalid-range";
    case Errc::pool_exhausted: return "pool-exhausted";
    case Errc::double_release: return "double-release";
    case Errc::inconsistent_measurement: return "inconsistent-measurement";
    case Errc::negative_result: return "negative-result";
    case Errc::index_overflow: return "index-overflow";
    case Errc::unknown_node: return "unknown-node";
    case Errc::invalid_probability: return "invalid-probability";
    case Errc::invalid_config: return "invalid-config";
    case Errc::config_parse: return "config-parse";
  }
  return "unknown";
}

std::string_view instruction_name(Instruction instr) noexcept {
  switch (instr) {
    case Instruction::Pte: return "PTE";
    case Instruction::TQuery: return "T-Query";
    case Instruction::NetConfig: return "Net-Config";
    case Instruction::PteS: return "PTE-S";
    case Instruction::PteF: return "PTE-F";
    case Instruction::TQueryS: return "TQuery-S";
    case Instruction::TQueryF: return "TQuery-F";
    case Instruction::NetconfigS: return "Netconfig-S";
    case Instruction::NetconfigF: return "Netconfig-F";
    case Instruction::Poll: return "Poll";
  }
  return "?";
}

std::optional<Instruction> instruction_from_code(std::uint8_t code) noexcept {
  switch (code) {
    case 0x0B: case 0x0C: case 0x0D:
    case 0x10: case 0x11: case 0x12: case 0x13: case 0x14: case 0x15: case 0x16:
      return static_cast<Instruction>(code);
    default:
      return std::nullopt;
  }
}

MacAddress MacAddress::from_index(std::uint32_t index) {
  MacAddress mac;
  mac.octets = {0x02, 0x00,
                static_cast<std::uint8_t>(index >> 24), static_cast<std::uint8_t>(index >> 16),
                static_cast<std::uint8_t>(index >> 8), static_cast<std::uint8_t>(index)};
  return mac;
}

MacAddress MacAddress::parse(std::string_view text) {
  MacAddress mac;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < kMacOctets; ++i) {
    if (i > 0) {
      if (pos >= text.size() || text[pos] != ':') throw Error(Errc::config_parse, "bad MAC '" + std::string(text) + "'");
      ++pos;
    }
    if (pos + 2 > text.size()) throw Error(Errc::config_parse, "bad MAC '" + std::string(text) + "'");
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + 2, value, 16);
    if (ec != std::errc{} || ptr != text.data() + pos + 2) {
      throw Error(Errc::config_parse, "bad MAC '" + std::string(text) + "'");
    }
    mac.octets[i] = static_cast<std::uint8_t>(value);
    pos += 2;
  }
  if (pos != text.size()) throw Error(Errc::config_parse, "bad MAC '" + std::string(text) + "'");
  return mac;
}

std::string MacAddress::to_string() const {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", octets[0], octets[1], octets[2],
                octets[3], octets[4], octets[5]);
  return buf;
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t pair_list_capacity(std::size_t prefix, std::size_t route_len) {
  if (route_len > kMaxRouteHops) return 0;
  const std::size_t room = kRoutePayloadBudget - route_len;
  return room < prefix ? 0 : (room - prefix) / kPairBytes;
}

class Writer {
 public:
  explicit Writer(FrameBytes& out, std::size_t pos) : out_(out), pos_(pos) {}
  void byte(std::uint8_t b) { out_[pos_++] = b; }
  void mac(const MacAddress& m) {
    for (auto o : m.octets) byte(o);
  }
  void pairs(const std::vector<MacSid>& list) {
    byte(static_cast<std::uint8_t>(list.size()));
    for (const auto& p : list) {
      mac(p.mac);
      byte(p.sid);
    }
  }

 private:
  FrameBytes& out_;
  std::size_t pos_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::uint8_t byte() {
    if (pos_ >= bytes_.size()) throw Error(Errc::malformed_payload, "payload truncated");
    return bytes_[pos_++];
  }
  MacAddress mac() {
    MacAddress m;
    for (auto& o : m.octets) o = byte();
    return m;
  }
  std::vector<MacSid> pairs() {
    const std::size_t count = byte();
    if (count * kPairBytes != remaining()) {
      throw Error(Errc::malformed_payload, "pair count disagrees with valid data length");
    }
    std::vector<MacSid> list(count);
    for (auto& p : list) {
      p.mac = mac();
      p.sid = byte();
    }
    return list;
  }
  std::uint8_t flag() {
    const std::uint8_t f = byte();
    if (f > 1) throw Error(Errc::malformed_payload, "end flag must be 0 or 1");
    return f;
  }
  void expect_end() {
    if (remaining() != 0) throw Error(Errc::malformed_payload, "trailing payload bytes");
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void check_flag(std::uint8_t flag) {
  if (flag > 1) throw Error(Errc::malformed_payload, "end flag must be 0 or 1");
}

}  // namespace

std::size_t tdf_capacity(std::size_t route_len) {
  return route_len > kMaxRouteHops ? 0 : kRoutePayloadBudget - route_len - 1;
}
std::size_t netconfig_f_capacity(std::size_t route_len) { return tdf_capacity(route_len); }
std::size_t sdf_pair_capacity(std::size_t route_len) { return pair_list_capacity(2, route_len); }
std::size_t tquery_f_pair_capacity(std::size_t route_len) { return pair_list_capacity(2, route_len); }
std::size_t netconfig_s_pair_capacity(std::size_t route_len) { return pair_list_capacity(3, route_len); }

std::size_t encoded_payload_size(const Payload& payload) {
  return std::visit(
      Overloaded{
          [](const Tdf& p) { return 1 + p.slot_indexes.size(); },
          [](const Maf&) { return kPairBytes; },
          [](const Sdf& p) { return 2 + kPairBytes * p.pairs.size(); },
          [](const Ack&) { return kPairBytes; },
          [](const PteS&) { return std::size_t{0}; },
          [](const PteF&) { return std::size_t{1}; },
          [](const TQueryS&) { return std::size_t{0}; },
          [](const TQueryF& p) { return 2 + kPairBytes * p.pairs.size(); },
          [](const NetconfigS& p) { return 3 + kPairBytes * p.pairs.size(); },
          [](const NetconfigF& p) { return 1 + p.sids.size(); },
          [](const Poll&) { return kPairBytes; },
      },
      payload);
}

bool payload_matches(Instruction instr, const Payload& payload) {
  using I = Instruction;
  return std::visit(
      Overloaded{
          [&](const Tdf&) { return instr == I::TQuery; },
          [&](const Maf&) { return instr == I::TQuery; },
          [&](const Sdf&) { return instr == I::NetConfig; },
          [&](const Ack&) { return instr == I::NetConfig; },
          [&](const PteS&) { return instr == I::Pte || instr == I::PteS; },
          [&](const PteF&) { return instr == I::Pte || instr == I::PteF; },
          [&](const TQueryS&) { return instr == I::TQuery || instr == I::TQueryS; },
          [&](const TQueryF&) { return instr == I::TQueryF; },
          [&](const NetconfigS&) { return instr == I::NetconfigS; },
          [&](const NetconfigF&) { return instr == I::NetconfigF; },
          [&](const Poll&) { return instr == I::Poll; },
      },
      payload);
}

Direction payload_direction(const Payload& payload) {
  return std::visit(Overloaded{
                        [](const Maf&) { return Direction::uplink; },
                        [](const Ack&) { return Direction::uplink; },
                        [](const PteF&) { return Direction::uplink; },
                        [](const TQueryF&) { return Direction::uplink; },
                        [](const NetconfigF&) { return Direction::uplink; },
                        [](const auto&) { return Direction::downlink; },
                    },
                    payload);
}

std::uint8_t checksum(std::span<const std::uint8_t> bytes) {
  std::uint8_t acc = 0;
  for (auto b : bytes) acc ^= b;
  return acc;
}

FrameBytes encode_frame(const DataFrame& frame) {
  if (frame.route.hops.size() > kMaxRouteHops) {
    throw Error(Errc::oversize_route, std::to_string(frame.route.hops.size()) + " hops");
  }
  if (!instruction_from_code(static_cast<std::uint8_t>(frame.instruction))) {
    throw Error(Errc::unknown_instruction, "code " + std::to_string(static_cast<int>(frame.instruction)));
  }
  if (!payload_matches(frame.instruction, frame.payload)) {
    throw Error(Errc::malformed_payload, "payload does not belong to " + std::string(instruction_name(frame.instruction)));
  }
  const std::size_t len = encoded_payload_size(frame.payload);
  if (len > kRoutePayloadBudget - frame.route.hops.size()) {
    throw Error(Errc::oversize_payload, std::to_string(len) + " payload bytes with " +
                                            std::to_string(frame.route.hops.size()) + " hops");
  }

  FrameBytes out{};
  out[0] = kFrameHead;
  out[1] = static_cast<std::uint8_t>(len);
  out[2] = static_cast<std::uint8_t>(frame.instruction);
  out[3] = static_cast<std::uint8_t>(frame.route.hops.size());
  std::copy(frame.route.hops.begin(), frame.route.hops.end(), out.begin() + 4);

  Writer w(out, 4 + frame.route.hops.size());
  std::visit(Overloaded{
                 [&](const Tdf& p) {
                   w.byte(static_cast<std::uint8_t>(p.slot_indexes.size()));
                   for (auto i : p.slot_indexes) w.byte(i);
                 },
                 [&](const Maf& p) { w.mac(p.mac); w.byte(p.osid); },
                 [&](const Sdf& p) { check_flag(p.end_flag); w.byte(p.end_flag); w.pairs(p.pairs); },
                 [&](const Ack& p) { w.mac(p.mac); w.byte(p.sid); },
                 [&](const PteS&) {},
                 [&](const PteF& p) { w.byte(p.sta_count); },
                 [&](const TQueryS&) {},
                 [&](const TQueryF& p) { check_flag(p.end_flag); w.byte(p.end_flag); w.pairs(p.pairs); },
                 [&](const NetconfigS& p) {
                   check_flag(p.end_flag);
                   w.byte(p.cco_counter);
                   w.byte(p.end_flag);
                   w.pairs(p.pairs);
                 },
                 [&](const NetconfigF& p) {
                   w.byte(static_cast<std::uint8_t>(p.sids.size()));
                   for (auto s : p.sids) w.byte(s);
                 },
                 [&](const Poll& p) { w.mac(p.mac); w.byte(p.sid); },
             },
             frame.payload);

  out[kFrameSize - 1] = checksum(std::span(out).first(kFrameSize - 1));
  return out;
}

namespace {

Payload decode_payload(Instruction instr, Direction direction, std::span<const std::uint8_t> body) {
  Reader r(body);
  auto fixed = [&](std::size_t n) {
    if (body.size() != n) throw Error(Errc::malformed_payload, "unexpected payload length " + std::to_string(body.size()));
  };
  switch (instr) {
    case Instruction::Pte:
      if (direction == Direction::downlink) {
        fixed(0);
        return PteS{};
      }
      fixed(1);
      return PteF{r.byte()};
    case Instruction::TQuery:
      if (direction == Direction::downlink) {
        if (body.empty()) return TQueryS{};
        Tdf tdf;
        const std::size_t count = r.byte();
        if (count != r.remaining()) throw Error(Errc::malformed_payload, "TDF count disagrees with valid data length");
        tdf.slot_indexes.assign(body.begin() + 1, body.end());
        return tdf;
      } else {
        fixed(kPairBytes);
        Maf m;
        m.mac = r.mac();
        m.osid = r.byte();
        return m;
      }
    case Instruction::NetConfig:
      if (direction == Direction::downlink) {
        Sdf s;
        s.end_flag = r.flag();
        s.pairs = r.pairs();
        return s;
      } else {
        fixed(kPairBytes);
        Ack a;
        a.mac = r.mac();
        a.sid = r.byte();
        return a;
      }
    case Instruction::PteS:
      fixed(0);
      return PteS{};
    case Instruction::PteF:
      fixed(1);
      return PteF{r.byte()};
    case Instruction::TQueryS:
      fixed(0);
      return TQueryS{};
    case Instruction::TQueryF: {
      TQueryF t;
      t.end_flag = r.flag();
      t.pairs = r.pairs();
      return t;
    }
    case Instruction::NetconfigS: {
      NetconfigS n;
      n.cco_counter = r.byte();
      n.end_flag = r.flag();
      n.pairs = r.pairs();
      return n;
    }
    case Instruction::NetconfigF: {
      NetconfigF n;
      const std::size_t count = r.byte();
      if (count != r.remaining()) throw Error(Errc::malformed_payload, "SID count disagrees with valid data length");
      n.sids.assign(body.begin() + 1, body.end());
      return n;
    }
    case Instruction::Poll: {
      fixed(kPairBytes);
      Poll p;
      p.mac = r.mac();
      p.sid = r.byte();
      return p;
    }
  }
  throw Error(Errc::unknown_instruction, "unhandled instruction");
}

}  // namespace

DataFrame decode_frame(std::span<const std::uint8_t> bytes, Direction direction) {
  if (bytes.size() != kFrameSize) {
    throw Error(Errc::bad_length, "frame is " + std::to_string(bytes.size()) + " bytes");
  }
  if (bytes[0] != kFrameHead) throw Error(Errc::bad_head, "head byte " + std::to_string(bytes[0]));
  if (checksum(bytes.first(kFrameSize - 1)) != bytes[kFrameSize - 1]) {
    throw Error(Errc::checksum_mismatch, "tail does not match XOR of bytes 0..98");
  }
  const std::size_t len = bytes[1];
  const std::size_t route_len = bytes[3];
  if (route_len > kMaxRouteHops || len + route_len > kRoutePayloadBudget) {
    throw Error(Errc::bad_length, "valid data length " + std::to_string(len) + " with route " + std::to_string(route_len));
  }
  const auto instr = instruction_from_code(bytes[2]);
  if (!instr) throw Error(Errc::unknown_instruction, "code " + std::to_string(bytes[2]));

  const std::size_t payload_at = 4 + route_len;
  const std::size_t padding_at = payload_at + len;
  for (std::size_t i = padding_at; i < kFrameSize - 1; ++i) {
    if (bytes[i] != 0) throw Error(Errc::malformed_payload, "nonzero padding");
  }

  DataFrame frame;
  frame.instruction = *instr;
  frame.route.hops.assign(bytes.begin() + 4, bytes.begin() + static_cast<std::ptrdiff_t>(payload_at));
  frame.payload = decode_payload(*instr, direction, bytes.subspan(payload_at, len));
  return frame;
}

std::string_view frame_label(const DataFrame& frame) {
  switch (frame.instruction) {
    case Instruction::TQuery:
      return std::holds_alternative<Maf>(frame.payload) ? "MAF"
             : std::holds_alternative<Tdf>(frame.payload) ? "TDF" : "TQuery-S";
    case Instruction::NetConfig:
      return std::holds_alternative<Ack>(frame.payload) ? "ACK" : "SDF";
    case Instruction::Pte:
      return std::holds_alternative<PteF>(frame.payload) ? "PTE-F" : "PTE-S";
    default:
      return instruction_name(frame.instruction);
  }
}

std::string hexdump_line(Micros time, Direction direction, const FrameBytes& bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string line = std::to_string(time);
  line += direction == Direction::downlink ? " DL " : " UL ";
  for (auto b : bytes) {
    line.push_back(kDigits[b >> 4]);
    line.push_back(kDigits[b & 0x0F]);
  }
  return line;
}

HexdumpRecord parse_hexdump_line(std::string_view line) {
  HexdumpRecord rec;
  const auto sp1 = line.find(' ');
  if (sp1 == std::string_view::npos) throw Error(Errc::config_parse, "hexdump line lacks fields");
  auto [p, ec] = std::from_chars(line.data(), line.data() + sp1, rec.time);
  if (ec != std::errc{} || p != line.data() + sp1) throw Error(Errc::config_parse, "bad hexdump timestamp");
  const auto tag = line.substr(sp1 + 1, 2);
  if (tag == "DL") rec.direction = Direction::downlink;
  else if (tag == "UL") rec.direction = Direction::uplink;
  else throw Error(Errc::config_parse, "bad hexdump direction tag");
  const auto hex = line.substr(sp1 + 4);
  if (line.size() < sp1 + 4 || line[sp1 + 3] != ' ' || hex.size() != 2 * kFrameSize) {
    throw Error(Errc::config_parse, "hexdump frame must be 200 hex chars");
  }
  for (std::size_t i = 0; i < kFrameSize; ++i) {
    unsigned v = 0;
    auto [q, e] = std::from_chars(hex.data() + 2 * i, hex.data() + 2 * i + 2, v, 16);
    if (e != std::errc{} || q != hex.data() + 2 * i + 2) throw Error(Errc::config_parse, "bad hex digit");
    rec.bytes[i] = static_cast<std::uint8_t>(v);
  }
  return rec;
}

std::string_view preamble_name(PreambleKind kind) noexcept {
  switch (kind) {
    case PreambleKind::Req: return "REQ";
    case PreambleKind::Net: return "NET";
    case PreambleKind::Dat: return "DAT";
  }
  return "?";
}

PreamblePattern preamble_pattern(PreambleKind kind) noexcept {
  using enum Symbol;
  switch (kind) {
    case PreambleKind::Req: return {S, Z, Z, S, S};
    case PreambleKind::Net: return {S, S, Z, Z, S};
    case PreambleKind::Dat: return {S, Z, S, Z, S};
  }
  return {S, S, S, S, S};
}

std::optional<PreambleKind> classify_preamble(std::span<const Symbol> symbols) noexcept {
  if (symbols.size() != 5) return std::nullopt;
  for (auto kind : {PreambleKind::Req, PreambleKind::Net, PreambleKind::Dat}) {
    const auto pattern = preamble_pattern(kind);
    if (std::equal(pattern.begin(), pattern.end(), symbols.begin())) return kind;
  }
  return std::nullopt;
}

}  // namespace rpmac
