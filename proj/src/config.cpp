#include "rpmac/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>

#include "rpmac/error.hpp"

namespace rpmac {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& why) {
  throw Error(Errc::config_parse, key + " = '" + value + "': " + why);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || p != end) bad(key, value, "not a number");
  return out;
}

template <>
double parse_number<double>(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used != value.size()) bad(key, value, "not a number");
    return d;
  } catch (const std::logic_error&) {
    bad(key, value, "not a number");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  const auto v = lower(value);
  if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
  if (v == "off" || v == "false" || v == "no" || v == "0") return false;
  bad(key, value, "expected on/off");
}

double parse_probability(const std::string& key, const std::string& value) {
  const double p = parse_number<double>(key, value);
  if (!(p >= 0.0 && p <= 1.0)) bad(key, value, "probability outside [0, 1]");
  return p;
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& section, const std::string& key, const std::string& value) {
  const std::string name = section + "." + key;
  auto& net = cfg.network;
  const auto u64 = [&] { return parse_number<std::uint64_t>(name, value); };
  const auto u32 = [&] { return parse_number<std::uint32_t>(name, value); };
  const auto micros = [&] { return parse_number<Micros>(name, value); };
  const auto real = [&] { return parse_number<double>(name, value); };

  if (section == "run") {
    if (key == "protocol") {
      try {
        net.protocol = parse_protocol(value);
      } catch (const Error& e) {
        bad(name, value, "unknown protocol");
      }
    } else if (key == "seed") {
      cfg.seed = u64();
    } else if (key == "trials") {
      cfg.trials = u64();
    } else if (key == "max_nc") {
      net.max_nc = u32();
    } else if (key == "termination_window") {
      net.termination_window = u32();
    } else {
      bad(name, value, "unknown key");
    }
  } else if (section == "mac") {
    if (key == "n_max") {
      net.n_max = u32();
    } else if (key == "p") {
      net.p = real();
    } else if (key == "max_retries") {
      net.max_retries = u32();
    } else if (key == "pair_batch") {
      net.pair_batch = u64();
    } else if (key == "empty_pte_limit") {
      net.empty_pte_limit = u32();
    } else {
      bad(name, value, "unknown key");
    }
  } else if (section == "timing") {
    if (key == "t_pte") {
      net.timing.pte_slot = micros();
    } else if (key == "t_csma") {
      net.timing.csma_slot = micros();
    } else if (key == "t_data") {
      net.timing.data_slot = micros();
    } else if (key == "jitter_stddev") {
      net.jitter.slot_jitter_stddev = real();
    } else if (key == "drift_bound") {
      net.jitter.drift_bound = real();
    } else {
      bad(name, value, "unknown key");
    }
  } else if (section == "robustness") {
    if (key == "collision_handling") {
      net.robustness.collision_handling = parse_bool(name, value);
    } else if (key == "retransmission") {
      net.robustness.retransmission = parse_bool(name, value);
    } else {
      bad(name, value, "unknown key");
    }
  } else if (section == "loss") {
    if (key == "frame") {
      cfg.frame_loss = parse_probability(name, value);
    } else if (key == "preamble") {
      cfg.preamble_loss = parse_probability(name, value);
    } else {
      bad(name, value, "unknown key");
    }
  } else if (section == "topology") {
    auto& topo = cfg.topology;
    if (key == "file") {
      topo.file = value;
    } else if (key == "generator") {
      const auto g = lower(value);
      if (g != "star" && g != "chain-of-stars" && g != "random-tree" && g != "layered" && g != "feeder") bad(name, value, "unknown generator");
      topo.generator = g;
    } else if (key == "stas") {
      topo.stas = u64();
    } else if (key == "layers") {
      topo.layers = u64();
    } else if (key == "max_layers") {
      topo.max_layers = u64();
    } else if (key == "per_layer") {
      topo.per_layer = u64();
    } else if (key == "cross_link") {
      topo.cross_link = parse_probability(name, value);
    } else if (key == "seed") {
      topo.seed = u64();
    } else {
      bad(name, value, "unknown key");
    }
  } else if (section == "calibration") {
    auto& h = net.hardware;
    if (key == "t_p") {
      h.tx_delay = micros();
    } else if (key == "r_p") {
      h.rx_delay = micros();
    } else if (key == "r_m") {
      h.transport_delay = micros();
    } else if (key == "tau") {
      h.tau = micros();
    } else {
      bad(name, value, "unknown key");
    }
  } else {
    throw Error(Errc::config_parse, "unknown section [" + section + "]");
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = " (line " + std::to_string(line_no) + ")";
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(Errc::config_parse, "unterminated section header" + where);
      section = lower(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(Errc::config_parse, "expected key = value" + where);
    if (section.empty()) throw Error(Errc::config_parse, "setting outside any section" + where);
    try {
      apply_setting(cfg, section, lower(trim(line.substr(0, eq))), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(Errc::config_parse, std::string(e.what()) + where);
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config_parse, "cannot open config file " + path);
  return parse_config(in);
}

void validate(const ExperimentConfig& cfg) {
  try {
    cfg.network.validate();
  } catch (const Error& e) {
    throw Error(Errc::config_parse, e.what());
  }
  if (cfg.trials == 0) throw Error(Errc::config_parse, "run.trials must be positive");
  const auto& t = cfg.topology;
  if (!t.file) {
    if (t.generator == "chain-of-stars" && (t.layers < 2 || t.per_layer == 0)) {
      throw Error(Errc::config_parse, "chain-of-stars needs layers >= 2 and per_layer >= 1");
    }
    if ((t.generator == "layered" || t.generator == "feeder") && (t.layers < 2 || t.stas + 1 < t.layers)) {
      throw Error(Errc::config_parse, t.generator + " needs layers >= 2 and at least layers-1 STAs");
    }
    if (t.max_layers && (*t.max_layers < t.layers || t.stas + 1 < *t.max_layers)) {
      throw Error(Errc::config_parse, "topology.max_layers must be >= layers and at most stas+1");
    }
  }
}

Topology build_topology(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  const auto& spec = cfg.topology;
  Topology topo;
  if (spec.file) {
    topo = Topology::load(*spec.file);
  } else {
    const std::uint64_t seed = spec.seed.value_or(run_seed);
    if (spec.generator == "star") {
      topo = Topology::star(spec.stas);
    } else if (spec.generator == "chain-of-stars") {
      topo = Topology::chain_of_stars(spec.layers, spec.per_layer);
    } else if (spec.generator == "random-tree") {
      topo = Topology::random_tree(spec.stas, seed);
    } else {
      std::size_t layers = spec.layers;
      if (spec.max_layers) layers += static_cast<std::size_t>(seed % (*spec.max_layers - spec.layers + 1));
      topo = spec.generator == "feeder" ? Topology::feeder(spec.stas, layers, seed)
                                        : Topology::layered(spec.stas, layers, seed, spec.cross_link);
    }
  }
  topo.set_all_losses(cfg.frame_loss, cfg.preamble_loss);
  return topo;
}

}  // namespace rpmac
