#include "hwr/skeleton_graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "hwr/format.hpp"

namespace hwr {

const char* to_string(PointKind k) {
  switch (k) {
    case PointKind::End: return "End";
    case PointKind::Branch: return "Branch";
    case PointKind::Cross: return "Cross";
    case PointKind::Anchor: return "Anchor";
  }
  return "?";
}

const char* to_string(SegmentType t) {
  switch (t) {
    case SegmentType::Type1: return "1";
    case SegmentType::Type2: return "2";
    case SegmentType::Type0: return "0";
  }
  return "?";
}

double Segment::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < chain.size(); ++i)
    len += std::hypot(chain[i].x - chain[i - 1].x, chain[i].y - chain[i - 1].y);
  return len;
}

std::vector<PixelPos> skeleton_neighbours(const BinaryImage& img, PixelPos p) {
  std::vector<PixelPos> out;
  for (int k = 0; k < 8; ++k) {
    const int nx = p.x + kDx8[k], ny = p.y + kDy8[k];
    if (!img.at(nx, ny)) continue;
    const bool diagonal = kDx8[k] != 0 && kDy8[k] != 0;
    if (diagonal && (img.at(p.x + kDx8[k], p.y) || img.at(p.x, p.y + kDy8[k]))) continue;
    out.push_back({nx, ny});
  }
  return out;
}

std::vector<CharPoint> classify_pixels(const Skeleton& sk) {
  std::vector<CharPoint> out;
  const auto& img = sk.image;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!img(x, y)) continue;
      const auto n = skeleton_neighbours(img, {x, y}).size();
      if (n <= 1)
        out.push_back({{x, y}, PointKind::End});
      else if (n == 3)
        out.push_back({{x, y}, PointKind::Branch});
      else if (n >= 4)
        out.push_back({{x, y}, PointKind::Cross});
    }
  }
  return out;
}

namespace {

int raw_neighbour_count(const BinaryImage& img, int x, int y) {
  int n = 0;
  for (int k = 0; k < 8; ++k) n += img.at(x + kDx8[k], y + kDy8[k]);
  return n;
}

struct PixelIndex {
  int width;
  std::size_t operator()(PixelPos p) const { return static_cast<std::size_t>(p.y) * width + p.x; }
};

std::uint64_t step_key(std::size_t a, std::size_t b) { return (static_cast<std::uint64_t>(a) << 32) | b; }

} // namespace

SegmentGraph extract_segments(const Skeleton& sk, const std::vector<CharPoint>& pts) {
  SegmentGraph g;
  const auto& img = sk.image;
  if (img.empty()) return g;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img(x, y)) {
        const int raw = raw_neighbour_count(img, x, y);
        if (raw >= 5) throw MalformedSkeleton(x, y, raw);
      }

  const PixelIndex idx{img.width()};
  const std::size_t npix = static_cast<std::size_t>(img.width()) * img.height();
  std::vector<int> node_of(npix, -1);
  std::vector<PointKind> pixel_kind(npix, PointKind::End);
  std::vector<std::uint8_t> is_char(npix, 0);
  for (const auto& cp : pts) {
    pixel_kind[idx(cp.pos)] = cp.kind;
    is_char[idx(cp.pos)] = 1;
  }

  // Merge 8-adjacent junction pixels into clusters (flood fill in raster order).
  for (const auto& cp : pts) {
    if (node_of[idx(cp.pos)] >= 0) continue;
    GraphNode node;
    node.id = static_cast<int>(g.nodes.size());
    node.kind = cp.kind;
    std::vector<PixelPos> stack{cp.pos};
    node_of[idx(cp.pos)] = node.id;
    const bool junction = cp.kind == PointKind::Branch || cp.kind == PointKind::Cross;
    while (!stack.empty()) {
      const PixelPos p = stack.back();
      stack.pop_back();
      node.pixels.push_back(p);
      if (!junction) continue;
      for (const auto& q : skeleton_neighbours(img, p)) {
        const auto qi = idx(q);
        if (node_of[qi] >= 0) continue;
        if (is_char[qi] && (pixel_kind[qi] == PointKind::Branch || pixel_kind[qi] == PointKind::Cross)) {
          node_of[qi] = node.id;
          stack.push_back(q);
        }
      }
    }
    std::sort(node.pixels.begin(), node.pixels.end(), [](PixelPos a, PixelPos b) {
      return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    Eigen::Vector2d c = Eigen::Vector2d::Zero();
    for (const auto& p : node.pixels) c += Eigen::Vector2d(p.x, p.y);
    node.pos = c / static_cast<double>(node.pixels.size());
    g.nodes.push_back(std::move(node));
  }

  std::unordered_set<std::uint64_t> used;
  std::vector<std::uint8_t> visited(npix, 0);
  const std::size_t guard = img.count() + 2;

  auto walk = [&](PixelPos start, PixelPos first) {
    Segment seg;
    seg.id = static_cast<int>(g.edges.size());
    seg.n0 = node_of[idx(start)];
    seg.chain = {start, first};
    PixelPos prev = start, cur = first;
    for (std::size_t steps = 0; node_of[idx(cur)] < 0 && steps < guard; ++steps) {
      visited[idx(cur)] = 1;
      PixelPos next = prev;
      for (const auto& q : skeleton_neighbours(img, cur))
        if (!(q == prev)) {
          next = q;
          break;
        }
      seg.chain.push_back(next);
      prev = cur;
      cur = next;
    }
    seg.n1 = node_of[idx(cur)];
    used.insert(step_key(idx(start), idx(first)));
    used.insert(step_key(idx(cur), idx(prev)));
    g.edges.push_back(std::move(seg));
  };

  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    for (const auto& u : g.nodes[n].pixels) {
      for (const auto& v : skeleton_neighbours(img, u)) {
        if (node_of[idx(v)] == static_cast<int>(n)) continue;
        if (used.count(step_key(idx(u), idx(v)))) continue;
        walk(u, v);
      }
    }
  }

  // Closed loops without any characteristic point: anchor at the topmost,
  // then rightmost pixel.
  for (int y = 0; y < img.height(); ++y) {
    for (int x = img.width() - 1; x >= 0; --x) {
      const PixelPos p{x, y};
      if (!img(x, y) || node_of[idx(p)] >= 0 || visited[idx(p)]) continue;
      GraphNode node;
      node.id = static_cast<int>(g.nodes.size());
      node.kind = PointKind::Anchor;
      node.pixels = {p};
      node.pos = Eigen::Vector2d(x, y);
      node_of[idx(p)] = node.id;
      g.nodes.push_back(node);
      const auto nbrs = skeleton_neighbours(img, p);
      if (!nbrs.empty()) walk(p, nbrs.front());
    }
  }

  g.adjacency.assign(g.nodes.size(), {});
  for (const auto& e : g.edges) {
    g.adjacency[e.n0].push_back(e.id);
    g.adjacency[e.n1].push_back(e.id);
  }
  for (auto& node : g.nodes) {
    if (node.pixels.size() == 1 || node.kind == PointKind::End || node.kind == PointKind::Anchor) continue;
    const auto deg = g.adjacency[node.id].size();
    node.kind = deg >= 4 ? PointKind::Cross : PointKind::Branch;
  }
  return g;
}

SegmentGraph classify_segment_types(SegmentGraph g) {
  const int n = static_cast<int>(g.nodes.size());
  auto connected_without = [&](int skip, int from, int to) {
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{from};
    seen[from] = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      if (u == to) return true;
      for (int eid : g.adjacency[u]) {
        if (eid == skip) continue;
        const auto& e = g.edges[eid];
        const int v = e.n0 == u ? e.n1 : e.n0;
        if (!seen[v]) {
          seen[v] = 1;
          stack.push_back(v);
        }
      }
    }
    return false;
  };
  for (auto& e : g.edges) {
    const bool touches_end = g.nodes[e.n0].kind == PointKind::End || g.nodes[e.n1].kind == PointKind::End;
    if (touches_end)
      e.type = SegmentType::Type1;
    else if (e.self_loop() || connected_without(e.id, e.n0, e.n1))
      e.type = SegmentType::Type0;
    else
      e.type = SegmentType::Type2;
  }
  return g;
}

SegmentGraph build_segment_graph(const Skeleton& sk) {
  return classify_segment_types(extract_segments(sk, classify_pixels(sk)));
}

Skeleton prune_spurs(const Skeleton& sk, int max_length) {
  Skeleton out = sk;
  if (max_length <= 0 || out.image.empty()) return out;
  for (int pass = 0; pass < 16; ++pass) {
    const auto g = build_segment_graph(out);
    // Shortest qualifying spur per junction.
    std::map<int, const Segment*> best;
    for (const auto& e : g.edges) {
      if (e.type != SegmentType::Type1 || e.self_loop()) continue;
      const auto& a = g.nodes[e.n0];
      const auto& b = g.nodes[e.n1];
      const bool a_end = a.kind == PointKind::End, b_end = b.kind == PointKind::End;
      if (a_end == b_end) continue;
      const int junction = a_end ? e.n1 : e.n0;
      if (g.degree(junction) < 3) continue;
      const int spur_pixels = static_cast<int>(e.chain.size()) - 1;
      if (spur_pixels > max_length) continue;
      auto it = best.find(junction);
      if (it == best.end() || e.chain.size() < it->second->chain.size()) best[junction] = &e;
    }
    if (best.empty()) break;
    for (const auto& [junction, e] : best) {
      const auto& jpix = g.nodes[junction].pixels;
      for (const auto& p : e->chain)
        if (std::find(jpix.begin(), jpix.end(), p) == jpix.end()) out.image.set(p.x, p.y, false);
    }
  }
  return out;
}

void write_graph_dump(const SegmentGraph& g, std::ostream& out) {
  for (const auto& n : g.nodes)
    out << "N " << n.id << ' ' << format_double(n.pos.x()) << ' ' << format_double(n.pos.y()) << ' '
        << to_string(n.kind) << '\n';
  for (const auto& e : g.edges)
    out << "E " << e.id << ' ' << e.n0 << ' ' << e.n1 << ' ' << to_string(e.type) << ' '
        << format_double(e.length()) << '\n';
}

GraphDump read_graph_dump(std::istream& in) {
  GraphDump d;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "N") {
      GraphDump::Node n{};
      std::string x, y;
      ls >> n.id >> x >> y >> n.kind;
      n.x = parse_double(x);
      n.y = parse_double(y);
      d.nodes.push_back(n);
    } else if (tag == "E") {
      GraphDump::Edge e{};
      std::string len;
      ls >> e.id >> e.n1 >> e.n2 >> e.type >> len;
      e.length = parse_double(len);
      d.edges.push_back(e);
    } else {
      throw InvalidInput("graph dump: unknown record '" + tag + "'");
    }
    if (ls.fail()) throw InvalidInput("graph dump: malformed line '" + line + "'");
  }
  return d;
}

} // namespace hwr
