#include <doctest.h>

#include "train/topology.hpp"

using namespace train;

TEST_CASE("star") {
  auto t = Topology::build(TopologyKind::Star, 5);
  CHECK(t.n() == 5);
  CHECK(t.height_net() == 1);
  CHECK(t.children(0).size() == 5);
  for (NodeId id = 1; id <= 5; ++id) {
    CHECK(t.parent(id) == 0);
    CHECK(t.height(id) == 1);
    CHECK(t.children(id).empty());
  }
  CHECK(t.adjacent(0, 3));
  CHECK_FALSE(t.adjacent(2, 3));
}

TEST_CASE("line") {
  auto t = Topology::build(TopologyKind::Line, 4);
  CHECK(t.height_net() == 4);
  CHECK(t.parent(1) == 0);
  CHECK(t.parent(4) == 3);
  CHECK(t.height(4) == 4);
  CHECK(t.adjacent(2, 3));
  CHECK(t.adjacent(3, 2));
  CHECK_FALSE(t.adjacent(1, 3));
}

TEST_CASE("tree heights") {
  CHECK(Topology::build(TopologyKind::Tree, 7, 2).height_net() == 3);
  CHECK(Topology::build(TopologyKind::Tree, 1000, 2).height_net() == 10);
  CHECK(Topology::build(TopologyKind::Tree, 1'000'000, 2).height_net() == 20);
  CHECK(Topology::build(TopologyKind::Tree, 13, 3).height_net() == 3);

  auto t = Topology::build(TopologyKind::Tree, 7, 2);
  CHECK(t.parent(1) == 0);
  CHECK(t.parent(2) == 1);
  CHECK(t.parent(3) == 1);
  CHECK(t.parent(7) == 3);
  CHECK(t.children(1).size() == 2);
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(Topology::build(TopologyKind::Tree, 10, 1), InvalidParameter);
  CHECK_THROWS_AS(Topology::build(TopologyKind::Tree, 10, 13), InvalidParameter);
  CHECK_THROWS_AS(Topology::build(TopologyKind::Star, 0), InvalidParameter);
}

TEST_CASE("custom parents") {
  auto t = Topology::from_parents({0, 0, 1, 1, 3});
  CHECK(t.kind() == TopologyKind::Custom);
  CHECK(t.height(4) == 3);
  CHECK(t.height_net() == 3);

  CHECK_THROWS_AS(Topology::from_parents({0, 0, 3, 2}), ConfigError);  // cycle
  CHECK_THROWS_AS(Topology::from_parents({0, 0, 9}), ConfigError);
}

TEST_CASE("labels") {
  CHECK(TopologySpec{TopologyKind::Star, 3, 2}.label() == "star");
  CHECK(TopologySpec{TopologyKind::Tree, 3, 4}.label() == "tree:4");
}
