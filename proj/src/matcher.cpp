#include "hwr/matcher.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "hwr/format.hpp"
#include "hwr/model_io.hpp"

namespace hwr {

namespace fs = std::filesystem;

TrajectoryGraph graph_from_model(const BetaEllipticModel& model) {
  TrajectoryGraph g;
  g.nodes.resize(2, static_cast<Eigen::Index>(model.strokes.size()));
  for (std::size_t i = 0; i < model.strokes.size(); ++i)
    g.nodes.col(static_cast<Eigen::Index>(i)) = model.strokes[i].midpoint();
  return g;
}

TrajectoryGraph graph_from_spans(const OrderedTrace& trace, const std::vector<StrokeSpan>& spans) {
  TrajectoryGraph g;
  g.nodes.resize(2, static_cast<Eigen::Index>(spans.size()));
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const auto& sp = spans[i];
    if (sp.p_last >= trace.points.size() || sp.p_first > sp.p_last)
      throw InvalidInput("graph_from_spans: span outside the trace");
    const std::span<const Point> pts(trace.points.data() + sp.p_first, sp.p_last - sp.p_first + 1);
    const double half = 0.5 * path_length(pts);
    Point mid = pts.front();
    double acc = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) {
      const double step = (pts[k] - pts[k - 1]).norm();
      if (acc + step >= half && step > 0.0) {
        mid = pts[k - 1] + (half - acc) / step * (pts[k] - pts[k - 1]);
        break;
      }
      acc += step;
      mid = pts[k];
    }
    g.nodes.col(static_cast<Eigen::Index>(i)) = mid;
  }
  return g;
}

TrajectoryGraph normalize(const TrajectoryGraph& g) {
  TrajectoryGraph out = g;
  if (g.size() == 0) return out;
  out.nodes.colwise() -= g.nodes.rowwise().mean();
  const double diag = (out.nodes.rowwise().maxCoeff() - out.nodes.rowwise().minCoeff()).norm();
  if (diag > 0.0) out.nodes /= diag;
  return out;
}

namespace {

// Nodes of `from` associated into `to`.
std::vector<Eigen::Index> nearest(const Eigen::Matrix2Xd& from, const Eigen::Matrix2Xd& to) {
  std::vector<Eigen::Index> out(static_cast<std::size_t>(from.cols()));
  for (Eigen::Index i = 0; i < from.cols(); ++i) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < to.cols(); ++j) {
      const double d = point_distance(from.col(i), to.col(j));
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

GraphDistance directed_distance(const Eigen::Matrix2Xd& from, const Eigen::Matrix2Xd& to, Eigen::Index gap) {
  GraphDistance d;
  d.size_gap = gap;
  const auto match = nearest(from, to);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < from.cols(); ++i) {
    const double di = point_distance(from.col(i), to.col(match[static_cast<std::size_t>(i)]));
    sum += di;
    d.penalty = std::max(d.penalty, di);
  }
  d.mean_term = from.cols() ? sum / static_cast<double>(from.cols()) : 0.0;
  d.value = d.mean_term + d.penalty * static_cast<double>(gap);
  return d;
}

} // namespace

Association associate(const TrajectoryGraph& g1, const TrajectoryGraph& g2) {
  Association a;
  if (g1.size() <= g2.size()) {
    const auto m = nearest(g1.nodes, g2.nodes);
    for (Eigen::Index i = 0; i < g1.size(); ++i) a.pairs.emplace_back(i, m[static_cast<std::size_t>(i)]);
  } else {
    const auto m = nearest(g2.nodes, g1.nodes);
    for (Eigen::Index j = 0; j < g2.size(); ++j) a.pairs.emplace_back(m[static_cast<std::size_t>(j)], j);
  }
  return a;
}

GraphDistance graph_distance(const TrajectoryGraph& g1, const TrajectoryGraph& g2) {
  if (g1.size() == 0 || g2.size() == 0) throw InvalidInput("graph_distance: empty graph");
  const Eigen::Index gap = std::abs(g1.size() - g2.size());
  return g1.size() <= g2.size() ? directed_distance(g1.nodes, g2.nodes, gap)
                                : directed_distance(g2.nodes, g1.nodes, gap);
}

GraphDistance match_distance(const TrajectoryGraph& sample, const TrajectoryGraph& templ, const MatchOptions& opts) {
  GraphDistance d = graph_distance(sample, templ);
  if (opts.symmetric && sample.size() == templ.size()) {
    const GraphDistance r = directed_distance(templ.nodes, sample.nodes, 0);
    d.mean_term = 0.5 * (d.mean_term + r.mean_term);
    d.penalty = 0.5 * (d.penalty + r.penalty);
    d.value = 0.5 * (d.value + r.value);
  }
  return d;
}

void TemplateStore::add(const std::string& label, const TrajectoryGraph& g, std::string source) {
  if (label.empty()) throw InvalidInput("template store: empty label");
  if (g.size() == 0) throw InvalidInput("template store: empty graph for " + label);
  entries_[label].push_back({normalize(g), std::move(source)});
}

std::size_t TemplateStore::template_count() const {
  std::size_t n = 0;
  for (const auto& [label, ts] : entries_) n += ts.size();
  return n;
}

Classification classify(const TrajectoryGraph& sample, const TemplateStore& store, const MatchOptions& opts) {
  if (store.empty()) throw ConfigError("classify: empty template store");
  const TrajectoryGraph s = normalize(sample);
  // entries() is ordered by label, so strict comparisons keep the smaller label on ties.
  Classification best;
  double best_value = std::numeric_limits<double>::infinity();
  double runner_up = std::numeric_limits<double>::infinity();
  for (const auto& [label, ts] : store.entries()) {
    GraphDistance label_best;
    double v = std::numeric_limits<double>::infinity();
    for (const auto& t : ts) {
      const auto d = match_distance(s, t.graph, opts);
      if (d.value < v) {
        v = d.value;
        label_best = d;
      }
    }
    if (v < best_value) {
      runner_up = best_value;
      best_value = v;
      best.label = label;
      best.distance = label_best;
    } else if (v < runner_up) {
      runner_up = v;
    }
  }
  best.margin = runner_up - best_value;
  return best;
}

void write_nodes(const TrajectoryGraph& g, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  for (Eigen::Index i = 0; i < g.size(); ++i)
    out << format_double(g.nodes(0, i)) << ' ' << format_double(g.nodes(1, i)) << '\n';
}

TrajectoryGraph read_nodes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  std::vector<Point> pts;
  std::string x, y;
  while (in >> x >> y) {
    try {
      pts.emplace_back(parse_double(x), parse_double(y));
    } catch (const std::invalid_argument& e) {
      throw InvalidInput(path.string() + ": " + e.what());
    }
  }
  TrajectoryGraph g;
  g.nodes.resize(2, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) g.nodes.col(static_cast<Eigen::Index>(i)) = pts[i];
  return g;
}

void save_store(const fs::path& dir, const std::map<std::string, std::vector<StoredTemplate>>& entries) {
  fs::create_directories(dir);
  std::ofstream manifest(dir / "labels.manifest", std::ios::binary);
  if (!manifest) throw InvalidInput("cannot write " + (dir / "labels.manifest").string());
  for (const auto& [label, ts] : entries) {
    if (ts.empty()) throw InvalidInput("template store: label without templates: " + label);
    fs::create_directories(dir / label);
    for (const auto& t : ts) {
      write_model_json(t.model, dir / label / (t.name + ".model.json"));
      write_nodes(t.graph, dir / label / (t.name + ".nodes"));
    }
    manifest << label << '\t' << ts.size() << '\n';
  }
}

TemplateStore load_store(const fs::path& dir, MidpointSource midpoints) {
  std::ifstream manifest(dir / "labels.manifest", std::ios::binary);
  if (!manifest) throw NotFound("template store: no labels.manifest in " + dir.string());
  TemplateStore store;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw InvalidInput("labels.manifest: malformed line '" + line + "'");
    const std::string label = line.substr(0, tab);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir / label)) {
      const std::string name = e.path().filename().string();
      if (name.size() > 11 && name.ends_with(".model.json")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InvalidInput("template store: no templates for label " + label);
    for (const auto& f : files) {
      const std::string stem = f.filename().string().substr(0, f.filename().string().size() - 11);
      if (midpoints == MidpointSource::Arc)
        store.add(label, graph_from_model(read_model_json(f)), f.string());
      else
        store.add(label, read_nodes(f.parent_path() / (stem + ".nodes")), f.string());
    }
  }
  if (store.empty()) throw ConfigError("template store is empty: " + dir.string());
  return store;
}

} // namespace hwr
