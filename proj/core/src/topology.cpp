#include "train/topology.hpp"

#include <algorithm>

namespace train {

std::string_view to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::Line:
      return "line";
    case TopologyKind::Star:
      return "star";
    case TopologyKind::Tree:
      return "tree";
    case TopologyKind::Custom:
      return "custom";
  }
  return "?";
}

std::string TopologySpec::label() const {
  if (kind == TopologyKind::Tree) return "tree:" + std::to_string(degree);
  return std::string(to_string(kind));
}

Topology Topology::build(const TopologySpec& spec) { return build(spec.kind, spec.n, spec.degree); }

Topology Topology::build(TopologyKind kind, std::uint32_t n, std::uint32_t degree) {
  if (n == 0) throw InvalidParameter("topology needs at least one prover");
  std::vector<NodeId> parents(static_cast<std::size_t>(n) + 1, kVerifierId);
  switch (kind) {
    case TopologyKind::Star:
      break;
    case TopologyKind::Line:
      for (NodeId id = 2; id <= n; ++id) parents[id] = id - 1;
      break;
    case TopologyKind::Tree:
      if (degree < 2 || degree > 12) {
        throw InvalidParameter("tree degree must be within 2..12, got " + std::to_string(degree));
      }
      // Breadth-first, left to right: node 1 is the root below the verifier.
      for (NodeId id = 2; id <= n; ++id) parents[id] = (id - 2) / degree + 1;
      break;
    case TopologyKind::Custom:
      throw InvalidParameter("custom topologies are built from a parent list");
  }
  Topology t;
  t.kind_ = kind;
  t.degree_ = kind == TopologyKind::Tree ? degree : 0;
  t.parent_ = std::move(parents);
  t.index();
  return t;
}

Topology Topology::from_parents(std::vector<NodeId> parents) {
  if (parents.size() < 2) throw InvalidParameter("topology needs at least one prover");
  Topology t;
  t.parent_ = std::move(parents);
  t.parent_[0] = kVerifierId;
  t.index();
  return t;
}

void Topology::index() {
  const std::size_t count = parent_.size();
  for (std::size_t id = 1; id < count; ++id) {
    if (parent_[id] >= count || parent_[id] == id) {
      throw ConfigError("node " + std::to_string(id) + " has an invalid parent");
    }
  }

  child_offset_.assign(count + 1, 0);
  for (std::size_t id = 1; id < count; ++id) ++child_offset_[parent_[id] + 1];
  for (std::size_t i = 1; i <= count; ++i) child_offset_[i] += child_offset_[i - 1];
  child_list_.resize(count - 1);
  std::vector<std::uint32_t> fill(child_offset_.begin(), child_offset_.end() - 1);
  for (std::size_t id = 1; id < count; ++id) {
    child_list_[fill[parent_[id]]++] = static_cast<NodeId>(id);
  }

  // Heights by BFS from the verifier; anything unreached is disconnected.
  height_.assign(count, 0);
  std::vector<NodeId> frontier{kVerifierId};
  std::size_t reached = 1;
  height_net_ = 0;
  while (!frontier.empty()) {
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      for (NodeId c : children(u)) {
        height_[c] = height_[u] + 1;
        next.push_back(c);
      }
    }
    reached += next.size();
    if (!next.empty()) height_net_ = height_[next.front()];
    frontier = std::move(next);
  }
  if (reached != count) {
    throw ConfigError("topology is disconnected: " + std::to_string(count - reached) +
                      " prover(s) have no path to the verifier");
  }
}

std::span<const NodeId> Topology::children(NodeId id) const {
  return std::span<const NodeId>(child_list_)
      .subspan(child_offset_[id], child_offset_[id + 1] - child_offset_[id]);
}

bool Topology::adjacent(NodeId a, NodeId b) const {
  const std::size_t count = parent_.size();
  if (a >= count || b >= count || a == b) return false;
  return (a != kVerifierId && parent_[a] == b) || (b != kVerifierId && parent_[b] == a);
}

}  // namespace train
