#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpmac/frame.hpp"
#include "rpmac/types.hpp"

namespace rpmac {

struct LinkParams {
  double frame_loss = 0.0;
  double preamble_loss = 0.0;
};

struct Neighbor {
  NodeId id = 0;
  LinkParams link;
};

/// Undirected multi-hop graph. Node 0 is the CCO; node ids are dense 0..n-1.
///
/// Text format, one record per line, '#' starts a comment:
///
///   node <id> <mac aa:bb:cc:dd:ee:ff>
///   link <a> <b> <frame_loss> <preamble_loss>
class Topology {
 public:
  NodeId add_node(const MacAddress& mac);
  NodeId add_node() { return add_node(MacAddress::from_index(static_cast<std::uint32_t>(macs_.size()))); }
  void add_link(NodeId a, NodeId b, LinkParams params = {});

  std::size_t size() const { return macs_.size(); }
  std::size_t sta_count() const { return macs_.empty() ? 0 : macs_.size() - 1; }
  const MacAddress& mac(NodeId id) const;
  std::span<const Neighbor> neighbors(NodeId id) const;
  const LinkParams* link(NodeId a, NodeId b) const;
  std::size_t link_count() const;

  /// Applies the same loss probabilities to every link.
  void set_all_losses(std::optional<double> frame_loss, std::optional<double> preamble_loss);

  /// Hop distance from the CCO; nullopt for unreachable nodes.
  std::vector<std::optional<std::uint32_t>> hop_depths() const;
  std::vector<NodeId> unreachable_nodes() const;

  /// Throws invalid-config for a missing CCO, self links or bad probabilities.
  void validate() const;

  static Topology parse(std::istream& in);
  static Topology load(const std::string& path);
  void write(std::ostream& out) const;

  // Generators.
  static Topology star(std::size_t stas);
  /// A chain of hub STAs; hub k has `per_layer - 1` leaf STAs and hub k+1 as children.
  /// `layers` counts the CCO's layer, so the deepest STAs sit at depth layers-1.
  static Topology chain_of_stars(std::size_t layers, std::size_t per_layer);
  /// Uniformly random recursive tree over `stas` STAs.
  static Topology random_tree(std::size_t stas, std::uint64_t seed);
  /// `stas` STAs spread over depths 1..layers-1. Each STA links to a random
  /// parent one layer up and, with probability `cross_link`, to a second one.
  static Topology layered(std::size_t stas, std::size_t layers, std::uint64_t seed, double cross_link = 0.3);
  /// STAs at random positions along a feeder with the CCO at its head; two
  /// nodes hear each other within one unit. Positions are spread so hop depth
  /// runs 1..layers-1.
  static Topology feeder(std::size_t stas, std::size_t layers, std::uint64_t seed);

 private:
  std::vector<MacAddress> macs_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

}  // namespace rpmac
