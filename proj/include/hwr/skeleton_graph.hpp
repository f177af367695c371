#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "hwr/imaging.hpp"

namespace hwr {

/// Anchor marks the designated node of a closed loop without junctions.
enum class PointKind { End, Branch, Cross, Anchor };

/// Type1 touches an end point, Type0 lies on a cycle (occlusion contour),
/// Type2 is any other link.
enum class SegmentType { Type1, Type2, Type0 };

const char* to_string(PointKind k);
const char* to_string(SegmentType t);

struct CharPoint {
  PixelPos pos;
  PointKind kind = PointKind::End;
};

struct GraphNode {
  int id = 0;
  PointKind kind = PointKind::End;
  /// Centroid of the merged characteristic pixels.
  Eigen::Vector2d pos = Eigen::Vector2d::Zero();
  std::vector<PixelPos> pixels;
};

struct Segment {
  int id = 0;
  int n0 = 0;
  int n1 = 0;
  SegmentType type = SegmentType::Type2;
  /// Ordered pixels from a pixel of node n0 to a pixel of node n1, both
  /// included. Interior pixels are chain[1 .. size-2].
  std::vector<PixelPos> chain;

  bool self_loop() const { return n0 == n1; }
  double length() const;
};

struct SegmentGraph {
  std::vector<GraphNode> nodes;
  std::vector<Segment> edges;
  /// Node id -> incident segment ids; a self-loop is listed twice.
  std::vector<std::vector<int>> adjacency;

  std::size_t degree(int node) const { return adjacency[node].size(); }
};

/// Skeleton neighbours with redundant diagonals pruned: a diagonal neighbour
/// counts only when both pixels it shares with p are background.
std::vector<PixelPos> skeleton_neighbours(const BinaryImage& img, PixelPos p);

/// Characteristic pixels: pruned neighbour count 0 or 1 (End), 3 (Branch), 4 (Cross).
std::vector<CharPoint> classify_pixels(const Skeleton& sk);

/// Walks the skeleton between characteristic points. Adjacent junction
/// pixels are merged into one node. Throws MalformedSkeleton for a pixel with
/// five or more 8-neighbours. Segment types are left as Type2; see
/// classify_segment_types().
SegmentGraph extract_segments(const Skeleton& sk, const std::vector<CharPoint>& pts);

/// Type1 if an end node is an End point, otherwise Type0 iff the edge is on a
/// cycle (not a bridge), otherwise Type2.
SegmentGraph classify_segment_types(SegmentGraph g);

/// classify_pixels + extract_segments + classify_segment_types.
SegmentGraph build_segment_graph(const Skeleton& sk);

/// Iteratively removes Type1 spurs shorter than max_length pixels that hang
/// off a junction.
Skeleton prune_spurs(const Skeleton& sk, int max_length);

/// Text dump: `N id x y kind` then `E id n1 n2 type length`.
void write_graph_dump(const SegmentGraph& g, std::ostream& out);

struct GraphDump {
  struct Node {
    int id;
    double x, y;
    std::string kind;
  };
  struct Edge {
    int id, n1, n2;
    int type;
    double length;
  };
  std::vector<Node> nodes;
  std::vector<Edge> edges;
};
GraphDump read_graph_dump(std::istream& in);

} // namespace hwr
