#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rpmac/config.hpp"
#include "rpmac/error.hpp"

using namespace rpmac;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

Errc parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("parsed: " << text);
  return Errc::bad_head;
}

std::uint32_t max_depth(const Topology& t) {
  std::uint32_t d = 0;
  for (const auto& v : t.hop_depths()) d = std::max(d, v.value_or(0));
  return d;
}

}  // namespace

TEST_CASE("defaults") {
  const auto cfg = parse("");
  CHECK(cfg.network.protocol == Protocol::RPmac);
  CHECK(cfg.network.n_max == 256);
  CHECK(cfg.network.p == 0.25);
  CHECK(cfg.network.max_retries == 3);
  CHECK(cfg.network.pair_batch == 12);
  CHECK(cfg.network.robustness.collision_handling);
  CHECK(cfg.network.robustness.retransmission);
  CHECK(cfg.trials == 1);
  CHECK_FALSE(cfg.seed.has_value());
  CHECK_FALSE(cfg.frame_loss.has_value());
  CHECK(cfg.topology.generator == "star");
}

TEST_CASE("every section is read") {
  const auto cfg = parse(
      "# full file\n"
      "[run]\n"
      "protocol = P-MAC\n"
      "seed = 42   # trailing comment\n"
      "trials = 5\n"
      "max_nc = 30\n"
      "termination_window = 3\n"
      "[MAC]\n"
      "n_max = 128\n"
      "p = 0.5\n"
      "max_retries = 4\n"
      "pair_batch = 10\n"
      "empty_pte_limit = 2\n"
      "[timing]\n"
      "t_pte = 700\n"
      "t_csma = 25000\n"
      "t_data = 21000\n"
      "jitter_stddev = 12.5\n"
      "drift_bound = 1e-5\n"
      "[robustness]\n"
      "collision_handling = off\n"
      "retransmission = no\n"
      "[loss]\n"
      "frame = 0.05\n"
      "preamble = 0.01\n"
      "[topology]\n"
      "generator = Feeder\n"
      "stas = 50\n"
      "layers = 3\n"
      "max_layers = 6\n"
      "seed = 9\n"
      "[calibration]\n"
      "t_p = 100\n"
      "r_p = 80\n"
      "r_m = 20\n"
      "tau = 0\n");
  const auto& n = cfg.network;
  CHECK(n.protocol == Protocol::PMac);
  CHECK(cfg.seed == 42u);
  CHECK(cfg.trials == 5);
  CHECK(n.max_nc == 30);
  CHECK(n.termination_window == 3);
  CHECK(n.n_max == 128);
  CHECK(n.p == 0.5);
  CHECK(n.max_retries == 4);
  CHECK(n.pair_batch == 10);
  CHECK(n.empty_pte_limit == 2);
  CHECK(n.timing.pte_slot == 700);
  CHECK(n.timing.csma_slot == 25000);
  CHECK(n.timing.data_slot == 21000);
  CHECK(n.jitter.slot_jitter_stddev == 12.5);
  CHECK(n.jitter.drift_bound == 1e-5);
  CHECK_FALSE(n.robustness.collision_handling);
  CHECK_FALSE(n.robustness.retransmission);
  CHECK(cfg.frame_loss == 0.05);
  CHECK(cfg.preamble_loss == 0.01);
  CHECK(cfg.topology.generator == "feeder");
  CHECK(cfg.topology.stas == 50);
  CHECK(cfg.topology.max_layers == 6u);
  CHECK(cfg.topology.seed == 9u);
  CHECK(n.hardware == DelayProfile{100, 80, 20, 0});
}

TEST_CASE("malformed input is a parse error") {
  CHECK(parse_error("[bogus]\nx = 1\n") == Errc::config_parse);
  CHECK(parse_error("[run]\ncolour = red\n") == Errc::config_parse);
  CHECK(parse_error("seed = 1\n") == Errc::config_parse);
  CHECK(parse_error("[run\nseed = 1\n") == Errc::config_parse);
  CHECK(parse_error("[run]\nseed 1\n") == Errc::config_parse);
  CHECK(parse_error("[run]\nseed = -3\n") == Errc::config_parse);
  CHECK(parse_error("[run]\nseed = 12abc\n") == Errc::config_parse);
  CHECK(parse_error("[run]\nprotocol = aloha\n") == Errc::config_parse);
  CHECK(parse_error("[robustness]\nretransmission = maybe\n") == Errc::config_parse);
  CHECK(parse_error("[topology]\ngenerator = mesh\n") == Errc::config_parse);
  CHECK(parse_error("[run]\ntrials = 0\n") == Errc::config_parse);
}

TEST_CASE("the error names its line") {
  try {
    parse("[run]\nseed = 1\n\ntrials = x\n");
    FAIL("parsed");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
}

TEST_CASE("out-of-range values are rejected") {
  CHECK(parse_error("[run]\nprotocol = CSMA\n[mac]\np = 0\n") == Errc::config_parse);
  CHECK(parse_error("[mac]\np = 1.5\n") == Errc::config_parse);
  CHECK(parse_error("[loss]\nframe = 1.2\n") == Errc::config_parse);
  CHECK(parse_error("[loss]\npreamble = -0.1\n") == Errc::config_parse);
  CHECK(parse_error("[mac]\nn_max = 0\n") == Errc::config_parse);
  CHECK(parse_error("[mac]\nn_max = 300\n") == Errc::config_parse);
  CHECK(parse_error("[mac]\npair_batch = 14\n") == Errc::config_parse);
  CHECK(parse_error("[mac]\nmax_retries = 0\n") == Errc::config_parse);
  CHECK(parse_error("[mac]\nempty_pte_limit = 0\n") == Errc::config_parse);
  CHECK(parse_error("[timing]\nt_data = 5000\n") == Errc::config_parse);
  CHECK(parse_error("[timing]\njitter_stddev = -1\n") == Errc::config_parse);
  CHECK(parse_error("[calibration]\ntau = 5\n") == Errc::config_parse);
  CHECK(parse_error("[topology]\ngenerator = feeder\nlayers = 1\n") == Errc::config_parse);
  CHECK(parse_error("[topology]\ngenerator = layered\nlayers = 4\nmax_layers = 3\n") == Errc::config_parse);
  CHECK(parse_error("[topology]\ngenerator = chain-of-stars\nper_layer = 0\n") == Errc::config_parse);
}

TEST_CASE("settings override parsed values") {
  auto cfg = parse("[run]\nprotocol = R-PMAC\n");
  apply_setting(cfg, "run", "protocol", "CSMA");
  apply_setting(cfg, "loss", "frame", "0.1");
  CHECK(cfg.network.protocol == Protocol::Csma);
  CHECK(cfg.frame_loss == 0.1);
  CHECK_THROWS_AS(apply_setting(cfg, "mac", "nope", "1"), Error);
  CHECK_THROWS_AS(apply_setting(cfg, "nowhere", "p", "1"), Error);
}

TEST_CASE("topologies built from the config") {
  auto cfg = parse("[topology]\ngenerator = star\nstas = 12\n[loss]\nframe = 0.2\n");
  const auto star = build_topology(cfg, 1);
  CHECK(star.sta_count() == 12);
  CHECK(star.link(0, 1)->frame_loss == 0.2);
  CHECK(star.link(0, 1)->preamble_loss == 0.0);

  cfg = parse("[topology]\ngenerator = feeder\nstas = 60\nlayers = 3\nmax_layers = 6\n");
  std::set<std::uint32_t> depths;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto t = build_topology(cfg, seed);
    CHECK(max_depth(t) == 2 + seed % 4);
    depths.insert(max_depth(t));
  }
  CHECK(depths.size() == 4);

  // A fixed generator seed gives the same topology for every run seed.
  cfg = parse("[topology]\ngenerator = random-tree\nstas = 20\nseed = 5\n");
  std::ostringstream a, b;
  build_topology(cfg, 1).write(a);
  build_topology(cfg, 2).write(b);
  CHECK(a.str() == b.str());
}

TEST_CASE("topology and config files") {
  const std::string topo_path = "rpmac_test_topology.txt";
  const std::string cfg_path = "rpmac_test_config.ini";
  {
    std::ofstream t(topo_path);
    Topology::chain_of_stars(3, 2).write(t);
    std::ofstream c(cfg_path);
    c << "[topology]\nfile = " << topo_path << "\n[loss]\npreamble = 0.3\n";
  }
  const auto cfg = load_config(cfg_path);
  const auto topo = build_topology(cfg, 1);
  CHECK(topo.sta_count() == 4);
  CHECK(max_depth(topo) == 2);
  CHECK(topo.neighbors(0).front().link.preamble_loss == 0.3);
  std::remove(topo_path.c_str());
  std::remove(cfg_path.c_str());

  try {
    load_config("/nonexistent/run.ini");
    FAIL("loaded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config_parse);
  }
}
