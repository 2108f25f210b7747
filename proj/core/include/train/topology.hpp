#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "train/types.hpp"

namespace train {

enum class TopologyKind : std::uint8_t { Line, Star, Tree, Custom };
std::string_view to_string(TopologyKind k);

struct TopologySpec {
  TopologyKind kind = TopologyKind::Star;
  std::uint32_t n = 10;
  std::uint32_t degree = 2;  // trees only

  /// "star", "line" or "tree:<d>".
  std::string label() const;
  friend bool operator==(const TopologySpec&, const TopologySpec&) = default;
};

/// Static spanning tree rooted at the verifier (id 0). Provers are 1..n.
class Topology {
 public:
  /// Throws InvalidParameter for n == 0 or a tree degree outside 2..12.
  static Topology build(const TopologySpec& spec);
  static Topology build(TopologyKind kind, std::uint32_t n, std::uint32_t degree = 2);

  /// parents[id] for id in 1..n (parents[0] is ignored). Throws ConfigError
  /// when some prover has no path to the verifier.
  static Topology from_parents(std::vector<NodeId> parents);

  TopologyKind kind() const { return kind_; }
  std::uint32_t degree() const { return degree_; }
  std::uint32_t n() const { return static_cast<std::uint32_t>(parent_.size() - 1); }
  NodeId parent(NodeId id) const { return parent_[id]; }
  std::uint32_t height(NodeId id) const { return height_[id]; }
  std::uint32_t height_net() const { return height_net_; }
  std::span<const NodeId> children(NodeId id) const;
  bool adjacent(NodeId a, NodeId b) const;

 private:
  Topology() = default;
  void index();

  TopologyKind kind_ = TopologyKind::Custom;
  std::uint32_t degree_ = 0;
  std::vector<NodeId> parent_;
  std::vector<std::uint32_t> height_;
  std::vector<std::uint32_t> child_offset_;
  std::vector<NodeId> child_list_;
  std::uint32_t height_net_ = 0;
};

}  // namespace train
