#include "hwr/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "hwr/svg.hpp"

namespace hwr {

namespace {

constexpr double kZoom = 8.0;

std::string hue(double f) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "hsl(%d,80%%,45%%)", static_cast<int>(std::lround(270.0 * f)));
  return buf;
}

const char* type_colour(SegmentType t) {
  switch (t) {
  case SegmentType::Type1: return "#d62728";
  case SegmentType::Type0: return "#1f77b4";
  case SegmentType::Type2: return "#2ca02c";
  }
  return "black";
}

const char* kind_colour(PointKind k) {
  switch (k) {
  case PointKind::End: return "#d62728";
  case PointKind::Branch: return "#ff7f0e";
  case PointKind::Cross: return "#9467bd";
  case PointKind::Anchor: return "#17becf";
  }
  return "black";
}

Point centre(PixelPos p) { return {p.x + 0.5, p.y + 0.5}; }

} // namespace

void plot_skeleton(const BinaryImage& word, const SegmentGraph& g, std::ostream& out) {
  SvgWriter svg(out, word.width(), word.height(), kZoom);
  svg.raster(word, "#ddd");
  for (const auto& e : g.edges) {
    Polyline pts;
    for (const auto& p : e.chain) pts.push_back(centre(p));
    svg.polyline(pts, type_colour(e.type), 0.4);
  }
  for (const auto& n : g.nodes) svg.circle(n.pos + Point(0.5, 0.5), 0.7, kind_colour(n.kind));
}

void plot_trace(const OrderedTrace& tr, const BinaryImage* ink, std::ostream& out) {
  double w = 1, h = 1;
  for (const auto& p : tr.points) {
    w = std::max(w, p.x() + 2);
    h = std::max(h, p.y() + 2);
  }
  if (ink) {
    w = std::max<double>(w, ink->width());
    h = std::max<double>(h, ink->height());
  }
  SvgWriter svg(out, w, h, kZoom);
  if (ink) svg.raster(*ink, "#ddd");
  const std::size_t n = tr.points.size();
  for (std::size_t s = 0; s < tr.stroke_count(); ++s) {
    const auto [b, e] = tr.stroke_range(s);
    for (std::size_t i = b; i + 1 < e; ++i)
      svg.line(tr.points[i] + Point(0.5, 0.5), tr.points[i + 1] + Point(0.5, 0.5),
               hue(static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(1, n - 1))), 0.35);
    if (b < e) svg.circle(tr.points[b] + Point(0.5, 0.5), 0.8, "black");
  }
}

void plot_velocity(const VelocityProfile& vp, const BetaEllipticModel& model, std::ostream& out) {
  constexpr double W = 640, H = 260, M = 30;
  double tmax = vp.size() ? vp.time(vp.size() - 1) : 1.0, vmax = 0.0;
  for (double v : vp.v) vmax = std::max(vmax, v);
  for (const auto& s : model.strokes) {
    tmax = std::max(tmax, s.beta.t1);
    vmax = std::max(vmax, s.beta.k);
  }
  if (tmax <= 0) tmax = 1;
  if (vmax <= 0) vmax = 1;
  auto at = [&](double t, double v) { return Point(M + (W - 2 * M) * t / tmax, H - M - (H - 2 * M) * v / (1.1 * vmax)); };

  SvgWriter svg(out, W, H);
  svg.line(at(0, 0), at(tmax, 0), "black");
  svg.line(at(0, 0), at(0, 1.1 * vmax), "black");
  svg.text(at(tmax, 0) + Point(-20, 20), "t", 12);
  svg.text(Point(4, 14), "speed", 12);

  Polyline measured;
  for (std::size_t i = 0; i < vp.size(); ++i) measured.push_back(at(vp.time(i), vp.v[i]));
  svg.polyline(measured, "#999", 1.5);

  constexpr int kSamples = 400;
  Polyline sum;
  for (int i = 0; i <= kSamples; ++i) {
    const double t = tmax * i / kSamples;
    double v = 0;
    for (const auto& s : model.strokes) v += beta_eval(t, s.beta);
    sum.push_back(at(t, v));
  }
  for (std::size_t k = 0; k < model.strokes.size(); ++k) {
    const auto& b = model.strokes[k].beta;
    Polyline bump;
    for (int i = 0; i <= kSamples / 4; ++i) {
      const double t = b.t0 + (b.t1 - b.t0) * i / (kSamples / 4);
      bump.push_back(at(t, beta_eval(t, b)));
    }
    svg.polyline(bump, hue(static_cast<double>(k) / std::max<std::size_t>(1, model.strokes.size())), 0.8);
  }
  svg.polyline(sum, "#1f77b4", 1.5);
}

void plot_model(const BetaEllipticModel& model, std::ostream& out) {
  const Reconstruction rec = reconstruct(model, 1000);
  Box box;
  for (const auto& p : rec.trace) box.extend(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())));
  // Near-straight strokes sit on huge ellipses; only small ones are drawn whole.
  constexpr double kMaxDrawnAxis = 50.0;
  for (const auto& s : model.strokes) {
    if (s.ellipse.a > kMaxDrawnAxis) continue;
    const Point c = s.ellipse.center;
    box.extend(static_cast<int>(std::floor(c.x() - s.ellipse.a)), static_cast<int>(std::floor(c.y() - s.ellipse.a)));
    box.extend(static_cast<int>(std::ceil(c.x() + s.ellipse.a)), static_cast<int>(std::ceil(c.y() + s.ellipse.a)));
  }
  if (box.empty()) box = {0, 0, 1, 1};
  const Point shift(2.0 - box.x0, 2.0 - box.y0);
  SvgWriter svg(out, box.width() + 4, box.height() + 4, kZoom / 2);
  for (std::size_t k = 0; k < model.strokes.size(); ++k) {
    const auto& s = model.strokes[k];
    const std::string colour = hue(static_cast<double>(k) / std::max<std::size_t>(1, model.strokes.size()));
    Polyline full, arc;
    for (int i = 0; i <= 96; ++i) full.push_back(ellipse_eval(2 * std::numbers::pi * i / 96, s.ellipse) + shift);
    for (int i = 0; i <= 48; ++i) arc.push_back(ellipse_eval(s.arc0 + (s.arc1 - s.arc0) * i / 48, s.ellipse) + shift);
    if (s.ellipse.a <= kMaxDrawnAxis) svg.polyline(full, "#e0e0e0", 0.2);
    svg.polyline(arc, colour, 0.6);
    svg.circle(s.midpoint() + shift, 0.6, colour);
  }
  Polyline trace;
  for (const auto& p : rec.trace) trace.push_back(p + shift);
  svg.polyline(trace, "black", 0.25);
}

} // namespace hwr
