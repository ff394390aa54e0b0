#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "rpmac/network.hpp"
#include "rpmac/topology.hpp"

namespace rpmac {

/// Where the topology of a run comes from: a file or a named generator.
struct TopologySpec {
  std::optional<std::string> file;
  std::string generator = "star";  // star | chain-of-stars | random-tree | layered | feeder
  std::size_t stas = 20;
  std::size_t layers = 3;
  /// When set, the layer count cycles through [layers, max_layers] by seed.
  std::optional<std::size_t> max_layers;
  std::size_t per_layer = 10;
  double cross_link = 0.3;
  /// Generator seed; the run seed is used when unset.
  std::optional<std::uint64_t> seed;
};

struct ExperimentConfig {
  NetworkConfig network;
  TopologySpec topology;
  std::optional<double> frame_loss;
  std::optional<double> preamble_loss;
  std::optional<std::uint64_t> seed;
  std::uint64_t trials = 1;
};

/// INI-style text:
///
///   [section]
///   key = value   # comment
///
/// Sections and keys: run {protocol, seed, trials, max_nc, termination_window},
/// mac {n_max, p, max_retries, pair_batch,
/// empty_pte_limit}, timing {t_pte, t_csma, t_data,
/// jitter_stddev, drift_bound}, robustness {collision_handling, retransmission},
/// loss {frame, preamble}, topology {file, generator, stas, layers, max_layers, per_layer,
/// cross_link, seed}, calibration {t_p, r_p, r_m, tau}.
/// Unknown sections or keys are errors (config-parse).
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Applies one `section.key = value` setting; used by the parser and by CLI overrides.
void apply_setting(ExperimentConfig& cfg, const std::string& section, const std::string& key, const std::string& value);

/// Validates everything that does not need the topology. Throws config-parse
/// for out-of-range values, invalid-probability for bad probabilities.
void validate(const ExperimentConfig& cfg);

/// Builds (or loads) the topology and applies the loss overrides.
Topology build_topology(const ExperimentConfig& cfg, std::uint64_t run_seed);

}  // namespace rpmac
