#include "hwr/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <queue>
#include <sstream>

#include "hwr/format.hpp"

namespace hwr {

std::pair<std::size_t, std::size_t> OrderedTrace::stroke_range(std::size_t s) const {
  const std::size_t b = s == 0 ? 0 : breaks[s - 1];
  const std::size_t e = s < breaks.size() ? breaks[s] : points.size();
  return {b, e};
}

std::span<const Point> OrderedTrace::stroke(std::size_t s) const {
  const auto [b, e] = stroke_range(s);
  return std::span<const Point>(points.data() + b, e - b);
}

double path_length(std::span<const Point> pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
  return len;
}

namespace {

Point to_point(PixelPos p) { return Point(p.x, p.y); }

struct HalfEdge {
  int segment;
  bool forward;
};

// Pixels of a segment oriented away from `node`.
std::vector<PixelPos> oriented_chain(const Segment& s, bool forward) {
  std::vector<PixelPos> c = s.chain;
  if (!forward) std::reverse(c.begin(), c.end());
  return c;
}

Point leading_direction(const std::vector<PixelPos>& chain, int window) {
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(window), chain.size() - 1);
  Point d = to_point(chain[k]) - to_point(chain[0]);
  const double n = d.norm();
  return n > 0 ? Point(d / n) : Point::Zero();
}

Point trailing_direction(const std::vector<PixelPos>& chain, int window) {
  const std::size_t last = chain.size() - 1;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(window), last);
  Point d = to_point(chain[last]) - to_point(chain[last - k]);
  const double n = d.norm();
  return n > 0 ? Point(d / n) : Point::Zero();
}

double angular_deviation(const Point& a, const Point& b) {
  if (a.isZero() || b.isZero()) return std::numbers::pi;
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

class Walker {
public:
  Walker(const SegmentGraph& g, const OrderOptions& opts, OrderedTrace& out, Traversal* trav)
      : g_(g), opts_(opts), out_(out), trav_(trav), traversed_(g.edges.size(), 0) {}

  void walk_component(const std::vector<int>& nodes, const std::vector<int>& edges) {
    int start = -1;
    auto better = [&](int a, int b) {
      if (b < 0) return true;
      const auto& pa = g_.nodes[a].pos;
      const auto& pb = g_.nodes[b].pos;
      if (pa.x() != pb.x()) return pa.x() > pb.x();
      return pa.y() < pb.y();
    };
    for (int n : nodes)
      if (g_.nodes[n].kind == PointKind::End && better(n, start)) start = n;
    if (start < 0)
      for (int n : nodes)
        if (better(n, start)) start = n;

    if (!out_.points.empty()) out_.breaks.push_back(out_.points.size());
    const std::size_t stroke_begin = out_.points.size();

    // Start pixel: the node pixel that the first segment leaves from, or the
    // node's first pixel for isolated nodes.
    int cur = start;
    Point incoming(-1.0, 0.0);
    std::size_t remaining = edges.size();
    bool first = true;
    if (edges.empty()) emit(g_.nodes[start].pixels.front());

    while (remaining > 0) {
      auto choice = pick(cur, incoming, first);
      if (choice.segment < 0) {
        // Dead end: retrace to the nearest node with untraversed segments.
        const auto path = path_to_unfinished(cur);
        if (path.empty()) break;
        for (const auto& h : path) {
          traverse(h, cur);
          if (!traversed_[h.segment]) {
            traversed_[h.segment] = 1;
            --remaining;
          }
          incoming = trailing_direction(oriented_chain(g_.edges[h.segment], h.forward), opts_.direction_window);
          cur = other_end(h, cur);
        }
        continue;
      }
      traverse(choice, cur);
      if (!traversed_[choice.segment]) {
        traversed_[choice.segment] = 1;
        --remaining;
      }
      incoming = trailing_direction(oriented_chain(g_.edges[choice.segment], choice.forward), opts_.direction_window);
      cur = other_end(choice, cur);
      first = false;
    }
    if (out_.points.size() == stroke_begin) emit(g_.nodes[start].pixels.front());
  }

private:
  int other_end(const HalfEdge& h, int from) const {
    const auto& s = g_.edges[h.segment];
    if (s.self_loop()) return from;
    return h.forward ? s.n1 : s.n0;
  }

  std::vector<HalfEdge> half_edges_from(int node) const {
    std::vector<HalfEdge> out;
    std::vector<int> seen;
    for (int eid : g_.adjacency[node]) {
      const auto& s = g_.edges[eid];
      if (s.self_loop()) {
        if (std::find(seen.begin(), seen.end(), eid) != seen.end()) continue;
        seen.push_back(eid);
        out.push_back({eid, true});
        out.push_back({eid, false});
      } else {
        out.push_back({eid, s.n0 == node});
      }
    }
    return out;
  }

  HalfEdge pick(int node, const Point& incoming, bool first) const {
    HalfEdge best{-1, true};
    double best_dev = 0, best_dist = 0;
    const Point here = last_point_or(node);
    for (const auto& h : half_edges_from(node)) {
      if (traversed_[h.segment]) continue;
      const auto chain = oriented_chain(g_.edges[h.segment], h.forward);
      const double dev = angular_deviation(incoming, leading_direction(chain, opts_.direction_window));
      const double dist = first ? 0.0 : (to_point(chain.front()) - here).norm();
      const bool take = best.segment < 0 || dev < best_dev - 1e-12 ||
                        (std::abs(dev - best_dev) <= 1e-12 &&
                         (dist < best_dist - 1e-12 ||
                          (std::abs(dist - best_dist) <= 1e-12 && h.segment < best.segment)));
      if (take) {
        best = h;
        best_dev = dev;
        best_dist = dist;
      }
    }
    return best;
  }

  Point last_point_or(int node) const {
    return out_.points.empty() ? g_.nodes[node].pos : out_.points.back();
  }

  bool unfinished(int node) const {
    for (int eid : g_.adjacency[node])
      if (!traversed_[eid]) return true;
    return false;
  }

  // Dijkstra by segment length; returns the half-edges to walk.
  std::vector<HalfEdge> path_to_unfinished(int from) const {
    const std::size_t n = g_.nodes.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<HalfEdge> via(n, HalfEdge{-1, true});
    std::vector<int> prev(n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[from] = 0.0;
    pq.push({0.0, from});
    int target = -1;
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      if (u != from && unfinished(u)) {
        target = u;
        break;
      }
      for (const auto& h : half_edges_from(u)) {
        const auto& s = g_.edges[h.segment];
        if (s.self_loop()) continue;
        const int v = h.forward ? s.n1 : s.n0;
        const double nd = d + s.length();
        if (nd < dist[v] - 1e-12 || (std::abs(nd - dist[v]) <= 1e-12 && prev[v] >= 0 && u < prev[v])) {
          dist[v] = nd;
          via[v] = h;
          prev[v] = u;
          pq.push({nd, v});
        }
      }
    }
    std::vector<HalfEdge> path;
    for (int v = target; v >= 0 && v != from; v = prev[v]) path.push_back(via[v]);
    std::reverse(path.begin(), path.end());
    return path;
  }

  void emit(PixelPos p) {
    const Point q = to_point(p);
    if (!out_.points.empty() && stroke_open() && (out_.points.back() - q).squaredNorm() == 0.0) return;
    out_.points.push_back(q);
  }

  bool stroke_open() const {
    return out_.breaks.empty() || out_.breaks.back() < out_.points.size();
  }

  // Appends a path inside the current node cluster from the last emitted
  // pixel to `target` so consecutive points stay 8-adjacent.
  void bridge_within(int node, PixelPos target) {
    if (out_.points.empty() || !stroke_open()) return;
    const PixelPos from{static_cast<int>(out_.points.back().x()), static_cast<int>(out_.points.back().y())};
    if (from == target) return;
    const auto& pix = g_.nodes[node].pixels;
    auto index_of = [&](PixelPos p) {
      return static_cast<int>(std::find(pix.begin(), pix.end(), p) - pix.begin());
    };
    const int s = index_of(from), t = index_of(target);
    if (s >= static_cast<int>(pix.size()) || t >= static_cast<int>(pix.size())) return;
    std::vector<int> prev(pix.size(), -1);
    std::vector<std::uint8_t> seen(pix.size(), 0);
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      if (u == t) break;
      for (std::size_t v = 0; v < pix.size(); ++v) {
        if (seen[v]) continue;
        if (std::abs(pix[u].x - pix[v].x) <= 1 && std::abs(pix[u].y - pix[v].y) <= 1) {
          seen[v] = 1;
          prev[v] = u;
          q.push(static_cast<int>(v));
        }
      }
    }
    std::vector<PixelPos> path;
    for (int v = t; v >= 0 && v != s; v = prev[v]) path.push_back(pix[v]);
    std::reverse(path.begin(), path.end());
    for (std::size_t i = 0; i + 1 < path.size(); ++i) emit(path[i]);
  }

  void traverse(const HalfEdge& h, int from) {
    const auto chain = oriented_chain(g_.edges[h.segment], h.forward);
    bridge_within(from, chain.front());
    for (const auto& p : chain) emit(p);
    if (trav_) trav_->segments.push_back(h.segment);
  }

  const SegmentGraph& g_;
  const OrderOptions& opts_;
  OrderedTrace& out_;
  Traversal* trav_;
  std::vector<std::uint8_t> traversed_;
};

} // namespace

OrderedTrace order_segments(const SegmentGraph& g, const OrderOptions& opts) {
  return order_segments(g, opts, nullptr);
}

OrderedTrace order_segments(const SegmentGraph& g, const OrderOptions& opts, Traversal* traversal) {
  OrderedTrace out;
  if (g.nodes.empty()) return out;

  // Connected components of the node graph.
  const std::size_t n = g.nodes.size();
  std::vector<int> comp(n, -1);
  int ncomp = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{static_cast<int>(s)};
    comp[s] = ncomp;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int eid : g.adjacency[u]) {
        const auto& e = g.edges[eid];
        const int v = e.n0 == u ? e.n1 : e.n0;
        if (comp[v] < 0) {
          comp[v] = ncomp;
          stack.push_back(v);
        }
      }
    }
    ++ncomp;
  }

  struct Component {
    std::vector<int> nodes, edges;
    double max_x = -std::numeric_limits<double>::infinity();
    double min_y_at_max = 0;
  };
  std::vector<Component> comps(static_cast<std::size_t>(ncomp));
  auto consider = [](Component& c, double x, double y) {
    if (x > c.max_x || (x == c.max_x && y < c.min_y_at_max)) {
      c.max_x = x;
      c.min_y_at_max = y;
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    auto& c = comps[comp[i]];
    c.nodes.push_back(static_cast<int>(i));
    for (const auto& p : g.nodes[i].pixels) consider(c, p.x, p.y);
  }
  for (const auto& e : g.edges) {
    auto& c = comps[comp[e.n0]];
    c.edges.push_back(e.id);
    for (const auto& p : e.chain) consider(c, p.x, p.y);
  }
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    if (a.max_x != b.max_x) return a.max_x > b.max_x;
    return a.min_y_at_max < b.min_y_at_max;
  });

  Walker walker(g, opts, out, traversal);
  for (const auto& c : comps) walker.walk_component(c.nodes, c.edges);
  return out;
}

std::vector<double> discrete_curvature(std::span<const Point> pts, double span) {
  const std::size_t n = pts.size();
  std::vector<double> kappa(n, 0.0);
  if (n < 3) return kappa;
  std::vector<double> s(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) s[i] = s[i - 1] + (pts[i] - pts[i - 1]).norm();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i, k = i;
    while (j > 0 && s[i] - s[j] < span) --j;
    while (k + 1 < n && s[k] - s[i] < span) ++k;
    if (j == i || k == i) continue;
    const Point a = pts[i] - pts[j];
    const Point b = pts[k] - pts[i];
    const double la = a.norm(), lb = b.norm();
    if (la == 0 || lb == 0) continue;
    const double cross = a.x() * b.y() - a.y() * b.x();
    const double turn = std::atan2(std::abs(cross), a.dot(b));
    kappa[i] = turn / (0.5 * (la + lb));
  }
  return kappa;
}

namespace {

Polyline smooth(std::span<const Point> pts, int window) {
  const std::size_t n = pts.size();
  Polyline out(pts.begin(), pts.end());
  const int half = window / 2;
  if (half <= 0 || n < 3) return out;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const std::size_t h = std::min<std::size_t>({static_cast<std::size_t>(half), i, n - 1 - i});
    Point acc = Point::Zero();
    for (std::size_t j = i - h; j <= i + h; ++j) acc += pts[j];
    out[i] = acc / static_cast<double>(2 * h + 1);
  }
  return out;
}

// Linear interpolation of x(s) on a monotone table.
double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin());
  const double x0 = xs[k - 1], x1 = xs[k];
  const double t = x1 > x0 ? (x - x0) / (x1 - x0) : 0.0;
  return ys[k - 1] + t * (ys[k] - ys[k - 1]);
}

Point point_at(const Polyline& pts, const std::vector<double>& s, double target) {
  if (target <= 0) return pts.front();
  if (target >= s.back()) return pts.back();
  const auto it = std::upper_bound(s.begin(), s.end(), target);
  const std::size_t k = static_cast<std::size_t>(it - s.begin());
  const double seg = s[k] - s[k - 1];
  const double t = seg > 0 ? (target - s[k - 1]) / seg : 0.0;
  return pts[k - 1] + t * (pts[k] - pts[k - 1]);
}

} // namespace

ResampledTrace resample(const OrderedTrace& tr, const ResampleOptions& opts, std::vector<std::string>* warnings) {
  ResampledTrace out;
  for (std::size_t si = 0; si < tr.stroke_count(); ++si) {
    const auto raw = tr.stroke(si);
    if (raw.size() < 2) {
      if (warnings) warnings->push_back("stroke " + std::to_string(si) + " has fewer than 2 points; skipped");
      continue;
    }
    const Polyline pts = smooth(raw, opts.smooth_window);
    const std::size_t n = pts.size();
    std::vector<double> s(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) s[i] = s[i - 1] + (pts[i] - pts[i - 1]).norm();
    const double total = s.back();
    if (total <= 0.0) {
      if (warnings) warnings->push_back("stroke " + std::to_string(si) + " has zero length; skipped");
      continue;
    }
    const auto kappa = discrete_curvature(pts, opts.curvature_span);
    std::vector<double> rho(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ends = std::exp(-s[i] / opts.end_length) + std::exp(-(total - s[i]) / opts.end_length);
      rho[i] = (1.0 + opts.lambda * std::abs(kappa[i])) * (1.0 + opts.end_boost * ends);
    }
    // Warped length U(s) = integral of rho ds.
    std::vector<double> u(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) u[i] = u[i - 1] + 0.5 * (rho[i] + rho[i - 1]) * (s[i] - s[i - 1]);
    const double utotal = u.back();
    const std::size_t intervals = std::max<std::size_t>(3, static_cast<std::size_t>(std::lround(utotal / opts.base_step)));

    if (!out.points.empty()) out.breaks.push_back(out.points.size());
    for (std::size_t j = 0; j <= intervals; ++j) {
      const double target_u = utotal * static_cast<double>(j) / static_cast<double>(intervals);
      out.points.push_back(point_at(pts, s, interp(u, s, target_u)));
    }
  }
  return out;
}

VelocityProfile estimate_velocity(const ResampledTrace& rs, double dt) {
  VelocityProfile vp;
  vp.dt = dt;
  for (std::size_t si = 0; si < rs.stroke_count(); ++si) {
    const auto [b, e] = rs.stroke_range(si);
    if (si > 0) {
      vp.v.push_back(0.0);
      vp.point_of.push_back(-1);
    }
    for (std::size_t i = b; i + 1 < e; ++i) {
      vp.v.push_back((rs.points[i + 1] - rs.points[i]).norm() / dt);
      vp.point_of.push_back(static_cast<long>(i));
    }
  }
  return vp;
}

OrderedTrace recover_trace(const BinaryImage& word, const RecoveryOptions& opts) {
  if (word.empty()) return {};
  const BinaryImage clean = remove_diacritics(denoise(word), DiacriticOptions{opts.diacritic_ratio});
  const Skeleton sk = prune_spurs(skeletonize(clean), opts.spur_length);
  return order_segments(build_segment_graph(sk), opts.order);
}

void write_trace(const OrderedTrace& tr, std::ostream& out) {
  out << "TRACE v1\n";
  for (std::size_t s = 0; s < tr.stroke_count(); ++s) {
    if (s > 0) out << '\n';
    for (const auto& p : tr.stroke(s))
      out << format_double(p.x()) << ' ' << format_double(p.y()) << ' ' << s << '\n';
  }
}

OrderedTrace read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "TRACE v1") throw InvalidInput("trace: missing 'TRACE v1' header");
  OrderedTrace tr;
  long current = -1;
  bool pending_break = false;
  while (std::getline(in, line)) {
    if (line.empty()) {
      pending_break = true;
      continue;
    }
    std::istringstream ls(line);
    std::string xs, ys;
    long id = 0;
    if (!(ls >> xs >> ys >> id)) throw InvalidInput("trace: malformed line '" + line + "'");
    if (current >= 0 && (id != current || pending_break)) {
      if (id != current + 1 || !pending_break) throw InvalidInput("trace: stroke ids must increase by one at blank lines");
      tr.breaks.push_back(tr.points.size());
    } else if (current < 0 && id != 0) {
      throw InvalidInput("trace: first stroke id must be 0");
    }
    pending_break = false;
    current = id;
    tr.points.emplace_back(parse_double(xs), parse_double(ys));
  }
  return tr;
}

void write_trace(const OrderedTrace& tr, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  write_trace(tr, out);
}

OrderedTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_trace(in);
}

double dtw_mean_error(std::span<const Point> a, std::span<const Point> b) {
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  const std::size_t n = a.size(), m = b.size();
  const double inf = std::numeric_limits<double>::infinity();
  // cost and path length of the best warp ending at (i, j)
  std::vector<double> cost((n + 1) * (m + 1), inf);
  std::vector<int> len((n + 1) * (m + 1), 0);
  auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
  cost[at(0, 0)] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const double d = (a[i - 1] - b[j - 1]).norm();
      std::size_t best = at(i - 1, j - 1);
      if (cost[at(i - 1, j)] < cost[best]) best = at(i - 1, j);
      if (cost[at(i, j - 1)] < cost[best]) best = at(i, j - 1);
      cost[at(i, j)] = cost[best] + d;
      len[at(i, j)] = len[best] + 1;
    }
  }
  return cost[at(n, m)] / static_cast<double>(len[at(n, m)]);
}

} // namespace hwr
