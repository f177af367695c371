#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hwr/skeleton_graph.hpp"

namespace hwr {

using Point = Eigen::Vector2d;
using Polyline = std::vector<Point>;

/// Point sequence with pen-up breaks. breaks[i] is the index of the first
/// point of stroke i+1; strictly increasing.
struct OrderedTrace {
  Polyline points;
  std::vector<std::size_t> breaks;

  std::size_t stroke_count() const { return points.empty() ? 0 : breaks.size() + 1; }
  /// Half-open [begin, end) index range of stroke s.
  std::pair<std::size_t, std::size_t> stroke_range(std::size_t s) const;
  std::span<const Point> stroke(std::size_t s) const;
  bool empty() const { return points.empty(); }
};

/// Trace resampled on an implied uniform clock (one sample per time unit).
struct ResampledTrace : OrderedTrace {};

/// Curvilinear speed. Break samples (value 0) separate pen-down strokes; for
/// every other sample i, point_of[i] is the index of the point the step
/// starts from, so sample i covers points point_of[i] .. point_of[i] + 1.
struct VelocityProfile {
  std::vector<double> v;
  std::vector<long> point_of;
  double dt = 1.0;

  std::size_t size() const { return v.size(); }
  double time(std::size_t i) const { return static_cast<double>(i) * dt; }
};

struct OrderOptions {
  /// Pixels used to estimate entry/exit directions at junctions.
  int direction_window = 5;
};

/// Rebuilds pen order over the segment graph. Components are visited right to
/// left. Each starts at its rightmost End (ties: smaller y), or its rightmost
/// node when no End exists. At a node the next segment is chosen
/// lexicographically by: untraversed first, smallest angular deviation from
/// the incoming direction, smallest pixel distance, smallest id. When no
/// untraversed segment leaves the node, the walk retraces the shortest path
/// to the nearest node that still has one.
OrderedTrace order_segments(const SegmentGraph& g, const OrderOptions& opts = {});

/// Per-traversal bookkeeping, for tests and diagnostics.
struct Traversal {
  /// Segment ids in the order walked (repeats included).
  std::vector<int> segments;
};
OrderedTrace order_segments(const SegmentGraph& g, const OrderOptions& opts, Traversal* traversal);

struct ResampleOptions {
  double lambda = 3.0;
  /// Arc length per sample where density is 1.
  double base_step = 1.0;
  /// Extra density at stroke ends: end_boost * exp(-d / end_length).
  double end_boost = 1.0;
  double end_length = 2.0;
  /// Moving-average window applied before curvature estimation.
  int smooth_window = 5;
  /// Arc distance used by the curvature estimate.
  double curvature_span = 3.0;
};

/// Arc-length resampling with local density (1 + lambda |kappa|) times an
/// end taper. Strokes with fewer than 2 points (or zero length) are dropped
/// and reported in warnings, when given.
ResampledTrace resample(const OrderedTrace& tr, const ResampleOptions& opts = {},
                        std::vector<std::string>* warnings = nullptr);

/// Discrete curvature (radians per unit length) at every point of a polyline.
std::vector<double> discrete_curvature(std::span<const Point> pts, double span);

/// v_i = |p_{i+1} - p_i| / dt per stroke, zero inserted at each break.
VelocityProfile estimate_velocity(const ResampledTrace& rs, double dt = 1.0);

/// Full recovery chain for one word raster: denoise, diacritic removal,
/// skeletonization, spur pruning, segment graph and ordering.
struct RecoveryOptions {
  double diacritic_ratio = 0.15;
  int spur_length = 4;
  OrderOptions order;
};
OrderedTrace recover_trace(const BinaryImage& word, const RecoveryOptions& opts = {});

// Trace file: "TRACE v1", then "x y stroke_id" lines with a blank line at
// each pen-up. Numbers use the shortest round-trip representation.
void write_trace(const OrderedTrace& tr, std::ostream& out);
OrderedTrace read_trace(std::istream& in);
void write_trace(const OrderedTrace& tr, const std::filesystem::path& path);
OrderedTrace read_trace(const std::filesystem::path& path);

/// Mean point error after dynamic time warping alignment of two polylines.
double dtw_mean_error(std::span<const Point> a, std::span<const Point> b);

double path_length(std::span<const Point> pts);

} // namespace hwr
