#include "rpmac/topology.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rpmac/error.hpp"
#include "rpmac/random.hpp"

namespace rpmac {

NodeId Topology::add_node(const MacAddress& mac) {
  macs_.push_back(mac);
  adjacency_.emplace_back();
  return static_cast<NodeId>(macs_.size() - 1);
}

void Topology::add_link(NodeId a, NodeId b, LinkParams params) {
  if (a >= size() || b >= size()) throw Error(Errc::unknown_node, "link " + std::to_string(a) + "-" + std::to_string(b));
  if (a == b) throw Error(Errc::invalid_config, "self link on node " + std::to_string(a));
  if (link(a, b)) throw Error(Errc::invalid_config, "duplicate link " + std::to_string(a) + "-" + std::to_string(b));
  adjacency_[a].push_back({b, params});
  adjacency_[b].push_back({a, params});
}

const MacAddress& Topology::mac(NodeId id) const {
  if (id >= size()) throw Error(Errc::unknown_node, "node " + std::to_string(id));
  return macs_[id];
}

std::span<const Neighbor> Topology::neighbors(NodeId id) const {
  if (id >= size()) throw Error(Errc::unknown_node, "node " + std::to_string(id));
  return adjacency_[id];
}

const LinkParams* Topology::link(NodeId a, NodeId b) const {
  if (a >= size()) return nullptr;
  for (const auto& n : adjacency_[a]) {
    if (n.id == b) return &n.link;
  }
  return nullptr;
}

std::size_t Topology::link_count() const {
  std::size_t n = 0;
  for (const auto& adj : adjacency_) n += adj.size();
  return n / 2;
}

void Topology::set_all_losses(std::optional<double> frame_loss, std::optional<double> preamble_loss) {
  for (auto& adj : adjacency_) {
    for (auto& n : adj) {
      if (frame_loss) n.link.frame_loss = *frame_loss;
      if (preamble_loss) n.link.preamble_loss = *preamble_loss;
    }
  }
}

std::vector<std::optional<std::uint32_t>> Topology::hop_depths() const {
  std::vector<std::optional<std::uint32_t>> depth(size());
  if (size() == 0) return depth;
  std::deque<NodeId> queue{kCcoNode};
  depth[kCcoNode] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (const auto& n : adjacency_[u]) {
      if (!depth[n.id]) {
        depth[n.id] = *depth[u] + 1;
        queue.push_back(n.id);
      }
    }
  }
  return depth;
}

std::vector<NodeId> Topology::unreachable_nodes() const {
  std::vector<NodeId> out;
  const auto depth = hop_depths();
  for (NodeId i = 0; i < depth.size(); ++i) {
    if (!depth[i]) out.push_back(i);
  }
  return out;
}

void Topology::validate() const {
  if (size() == 0) throw Error(Errc::invalid_config, "topology has no CCO (node 0)");
  for (NodeId a = 0; a < size(); ++a) {
    for (const auto& n : adjacency_[a]) {
      const auto ok = [](double p) { return p >= 0.0 && p <= 1.0; };
      if (!ok(n.link.frame_loss) || !ok(n.link.preamble_loss)) {
        throw Error(Errc::invalid_config, "loss probability outside [0,1] on link " + std::to_string(a) + "-" +
                                              std::to_string(n.id));
      }
    }
  }
  std::vector<MacAddress> sorted = macs_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(Errc::invalid_config, "duplicate MAC address in topology");
  }
}

Topology Topology::parse(std::istream& in) {
  Topology topo;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;
    const auto where = " (line " + std::to_string(line_no) + ")";
    if (kind == "node") {
      NodeId id;
      std::string mac;
      if (!(ss >> id >> mac)) throw Error(Errc::config_parse, "node record needs <id> <mac>" + where);
      if (id != topo.size()) throw Error(Errc::config_parse, "node ids must be dense and ascending" + where);
      topo.add_node(MacAddress::parse(mac));
    } else if (kind == "link") {
      NodeId a, b;
      LinkParams p;
      if (!(ss >> a >> b >> p.frame_loss >> p.preamble_loss)) {
        throw Error(Errc::config_parse, "link record needs <a> <b> <frame_loss> <preamble_loss>" + where);
      }
      topo.add_link(a, b, p);
    } else {
      throw Error(Errc::config_parse, "unknown record '" + kind + "'" + where);
    }
    std::string extra;
    if (ss >> extra) throw Error(Errc::config_parse, "trailing field '" + extra + "'" + where);
  }
  topo.validate();
  return topo;
}

Topology Topology::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config_parse, "cannot open topology file " + path);
  return parse(in);
}

void Topology::write(std::ostream& out) const {
  for (NodeId i = 0; i < size(); ++i) out << "node " << i << ' ' << macs_[i].to_string() << '\n';
  for (NodeId a = 0; a < size(); ++a) {
    for (const auto& n : adjacency_[a]) {
      if (a < n.id) out << "link " << a << ' ' << n.id << ' ' << n.link.frame_loss << ' ' << n.link.preamble_loss << '\n';
    }
  }
}

Topology Topology::star(std::size_t stas) {
  Topology t;
  t.add_node();
  for (std::size_t i = 0; i < stas; ++i) t.add_link(kCcoNode, t.add_node());
  return t;
}

Topology Topology::chain_of_stars(std::size_t layers, std::size_t per_layer) {
  if (layers < 2 || per_layer == 0) throw Error(Errc::invalid_config, "chain-of-stars needs layers >= 2 and per_layer >= 1");
  Topology t;
  t.add_node();
  NodeId hub = kCcoNode;
  for (std::size_t layer = 1; layer < layers; ++layer) {
    const NodeId next_hub = t.add_node();
    t.add_link(hub, next_hub);
    for (std::size_t i = 1; i < per_layer; ++i) t.add_link(hub, t.add_node());
    hub = next_hub;
  }
  return t;
}

Topology Topology::random_tree(std::size_t stas, std::uint64_t seed) {
  Rng rng(seed);
  Topology t;
  t.add_node();
  for (std::size_t i = 1; i <= stas; ++i) {
    const auto parent = static_cast<NodeId>(rng.uniform_int(0, i - 1));
    t.add_link(parent, t.add_node());
  }
  return t;
}

Topology Topology::layered(std::size_t stas, std::size_t layers, std::uint64_t seed, double cross_link) {
  if (layers < 2) throw Error(Errc::invalid_config, "layered topology needs at least 2 layers");
  if (stas + 1 < layers) throw Error(Errc::invalid_config, "not enough STAs to fill every layer");
  Rng rng(seed);
  Topology t;
  t.add_node();
  const std::size_t depths = layers - 1;
  std::vector<std::vector<NodeId>> by_depth(layers);
  by_depth[0].push_back(kCcoNode);
  for (std::size_t d = 1; d <= depths; ++d) {
    const std::size_t count = stas / depths + (d <= stas % depths ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) {
      const NodeId id = t.add_node();
      const auto& above = by_depth[d - 1];
      const NodeId parent = above[rng.uniform_int(0, above.size() - 1)];
      t.add_link(parent, id);
      if (above.size() > 1 && rng.bernoulli(cross_link)) {
        NodeId second = above[rng.uniform_int(0, above.size() - 1)];
        if (second != parent) t.add_link(second, id);
      }
      by_depth[d].push_back(id);
    }
  }
  return t;
}

Topology Topology::feeder(std::size_t stas, std::size_t layers, std::uint64_t seed) {
  if (layers < 2) throw Error(Errc::invalid_config, "feeder topology needs at least 2 layers");
  if (stas + 1 < layers) throw Error(Errc::invalid_config, "not enough STAs to fill every layer");
  Rng rng(seed);
  Topology t;
  t.add_node();
  const std::size_t depths = layers - 1;
  std::vector<double> pos{0.0};
  for (std::size_t d = 1; d <= depths; ++d) {
    const std::size_t count = stas / depths + (d <= stas % depths ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) {
      t.add_node();
      // (d-1, d]; the first of each band sits at its far edge so that hop
      // depth equals the band.
      const double back = i == 0 ? 0.0 : rng.uniform01();
      pos.push_back(static_cast<double>(d) - back);
    }
  }
  std::vector<NodeId> order(pos.size());
  for (NodeId i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return pos[a] < pos[b]; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    bool upstream = i == 0;
    for (std::size_t j = i + 1; j < order.size() && pos[order[j]] - pos[order[i]] <= 1.0; ++j) {
      t.add_link(order[i], order[j]);
    }
    for (std::size_t j = 0; j < i && !upstream; ++j) upstream = pos[order[i]] - pos[order[j]] <= 1.0;
    // A gap longer than the reach would strand the rest of the feeder.
    if (!upstream) t.add_link(order[i - 1], order[i]);
  }
  return t;
}

}  // namespace rpmac
