#include <doctest.h>

#include <set>
#include <sstream>

#include "helpers.hpp"
#include "hwr/trajectory.hpp"

using namespace hwr;

TEST_CASE("glyph graphs have the expected points and segment types") {
  for (const auto& g : testing::glyphs()) {
    CAPTURE(std::string(g.name));
    const auto graph = testing::glyph_graph(g.trace);
    int kinds[4] = {}, types[3] = {};
    for (const auto& n : graph.nodes) ++kinds[static_cast<int>(n.kind)];
    for (const auto& e : graph.edges) ++types[static_cast<int>(e.type)];
    CHECK(kinds[static_cast<int>(PointKind::End)] == g.ends);
    CHECK(kinds[static_cast<int>(PointKind::Branch)] == g.branches);
    CHECK(kinds[static_cast<int>(PointKind::Cross)] == g.crosses);
    CHECK(kinds[static_cast<int>(PointKind::Anchor)] == g.anchors);
    CHECK(types[static_cast<int>(SegmentType::Type1)] == g.type1);
    CHECK(types[static_cast<int>(SegmentType::Type2)] == g.type2);
    CHECK(types[static_cast<int>(SegmentType::Type0)] == g.type0);
  }
}

TEST_CASE("segments partition the skeleton") {
  for (const auto& g : testing::glyphs()) {
    CAPTURE(std::string(g.name));
    BinaryImage ink;
    testing::glyph_graph(g.trace, &ink);
    const auto sk = prune_spurs(skeletonize(ink), 4);
    const auto graph = build_segment_graph(sk);
    std::set<PixelPos> covered;
    for (const auto& e : graph.edges) covered.insert(e.chain.begin(), e.chain.end());
    for (const auto& n : graph.nodes) covered.insert(n.pixels.begin(), n.pixels.end());
    const auto pix = sk.image.pixels();
    CHECK(covered == std::set<PixelPos>(pix.begin(), pix.end()));
    for (std::size_t i = 0; i < graph.nodes.size(); ++i)
      for (int e : graph.adjacency[i]) {
        const auto& s = graph.edges[static_cast<std::size_t>(e)];
        CHECK((s.n0 == static_cast<int>(i) || s.n1 == static_cast<int>(i)));
      }
  }
}

TEST_CASE("spur pruning removes short end branches only") {
  BinaryImage img(40, 20);
  for (int x = 2; x <= 37; ++x) img.set(x, 10);
  for (int y = 7; y <= 9; ++y) img.set(20, y); // 3 px spur
  const Skeleton sk{img};
  const auto pruned = prune_spurs(sk, 4);
  CHECK_FALSE(pruned.image(20, 8));
  CHECK(pruned.image(2, 10));
  CHECK(pruned.image(37, 10));
  CHECK(prune_spurs(sk, 2).image(20, 8));
}

TEST_CASE("T glyph is walked from its rightmost end and covers every pixel") {
  BinaryImage ink;
  const auto g = testing::glyph_graph(testing::glyphs()[1].trace, &ink);
  Traversal walk;
  const auto tr = order_segments(g, {}, &walk);
  double right = -1;
  for (const auto& n : g.nodes)
    if (n.kind == PointKind::End) right = std::max(right, n.pos.x());
  CHECK(tr.points.front().x() == doctest::Approx(right));
  std::set<int> seen(walk.segments.begin(), walk.segments.end());
  CHECK(seen.size() == g.edges.size());
}

TEST_CASE("graph dump round trip") {
  const auto g = testing::glyph_graph(testing::glyphs()[2].trace);
  std::stringstream io;
  write_graph_dump(g, io);
  const auto d = read_graph_dump(io);
  REQUIRE(d.nodes.size() == g.nodes.size());
  REQUIRE(d.edges.size() == g.edges.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    CHECK(d.nodes[i].x == g.nodes[i].pos.x());
    CHECK(d.nodes[i].kind == to_string(g.nodes[i].kind));
  }
  for (std::size_t i = 0; i < g.edges.size(); ++i) CHECK(d.edges[i].length == g.edges[i].length());
}
