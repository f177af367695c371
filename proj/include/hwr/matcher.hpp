#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hwr/beta_elliptic.hpp"

namespace hwr {

/// A word reduced to one node per stroke, in stroke order.
struct TrajectoryGraph {
  Eigen::Matrix2Xd nodes;

  Eigen::Index size() const { return nodes.cols(); }
};

enum class MidpointSource { Arc, Span };

/// Arc midpoints of the fitted strokes.
TrajectoryGraph graph_from_model(const BetaEllipticModel& model);

/// Half-arc-length points of the raw trace over each stroke's point span.
TrajectoryGraph graph_from_spans(const OrderedTrace& trace, const std::vector<StrokeSpan>& spans);

/// Centroid to the origin, bounding-box diagonal to 1. A graph whose nodes
/// all coincide is only translated.
TrajectoryGraph normalize(const TrajectoryGraph& g);

template <typename A, typename B>
double point_distance(const Eigen::MatrixBase<A>& p1, const Eigen::MatrixBase<B>& p2) {
  return (p1 - p2).norm();
}

/// (index in g1, index in g2) pairs, one per node of the smaller graph
/// (g1 when sizes are equal), each matched to its nearest node in the other
/// graph; ties go to the lower index.
struct Association {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
};
Association associate(const TrajectoryGraph& g1, const TrajectoryGraph& g2);

struct GraphDistance {
  double value = 0.0;
  double mean_term = 0.0;
  double penalty = 0.0;
  Eigen::Index size_gap = 0;
};

/// Mean associated distance plus (max associated distance) * |N1 - N2|.
/// Inputs are expected to be normalized.
GraphDistance graph_distance(const TrajectoryGraph& g1, const TrajectoryGraph& g2);

struct MatchOptions {
  MidpointSource midpoints = MidpointSource::Arc;
  /// Average both association directions (only differs when N1 == N2).
  bool symmetric = false;
};

GraphDistance match_distance(const TrajectoryGraph& sample, const TrajectoryGraph& templ, const MatchOptions& opts);

struct Template {
  TrajectoryGraph graph; ///< normalized
  std::string source;
};

class TemplateStore {
public:
  void add(const std::string& label, const TrajectoryGraph& g, std::string source = {});
  const std::map<std::string, std::vector<Template>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t template_count() const;

private:
  std::map<std::string, std::vector<Template>> entries_;
};

struct Classification {
  std::string label;
  GraphDistance distance;
  /// Best distance among other labels minus the winning distance; infinite
  /// when the store has a single label.
  double margin = 0.0;
};

/// Nearest template over the store (1-NN). Ties resolve to the
/// lexicographically smaller label. Throws ConfigError on an empty store.
Classification classify(const TrajectoryGraph& sample, const TemplateStore& store, const MatchOptions& opts = {});

// On disk: <dir>/<label>/<name>.model.json per template, a sibling
// <name>.nodes file ("x y" per line) with the graph actually matched, and
// <dir>/labels.manifest with "label<TAB>count" lines.
struct StoredTemplate {
  std::string name;
  BetaEllipticModel model;
  TrajectoryGraph graph; ///< not normalized
};
void save_store(const std::filesystem::path& dir, const std::map<std::string, std::vector<StoredTemplate>>& entries);
TemplateStore load_store(const std::filesystem::path& dir, MidpointSource midpoints = MidpointSource::Arc);

void write_nodes(const TrajectoryGraph& g, const std::filesystem::path& path);
TrajectoryGraph read_nodes(const std::filesystem::path& path);

} // namespace hwr
