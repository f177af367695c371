#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "hwr/imaging.hpp"
#include "hwr/skeleton_graph.hpp"
#include "hwr/synth.hpp"

namespace testing {

using hwr::OrderedTrace;
using hwr::Point;
using hwr::Polyline;

inline OrderedTrace strokes(const std::vector<Polyline>& parts) {
  OrderedTrace t;
  for (const auto& s : parts) {
    if (!t.points.empty()) t.breaks.push_back(t.points.size());
    t.points.insert(t.points.end(), s.begin(), s.end());
  }
  return t;
}

inline Polyline segment(Point a, Point b, int n = 60) {
  Polyline p;
  for (int i = 0; i <= n; ++i) p.push_back(a + (b - a) * (i / double(n)));
  return p;
}

inline Polyline circle(Point c, double r, double a0 = 0.0, int n = 200) {
  Polyline p;
  for (int i = 0; i <= n; ++i) {
    const double a = a0 + 2 * std::numbers::pi * i / n;
    p.push_back(c + r * Point(std::cos(a), std::sin(a)));
  }
  return p;
}

// Lemniscate-like eight whose lobes cross once at the origin.
inline Polyline figure_eight() {
  Polyline p;
  for (int i = 0; i <= 400; ++i) {
    const double t = 2 * std::numbers::pi * i / 400;
    p.push_back(Point(10 * std::sin(2 * t), 20 * std::sin(t)));
  }
  return p;
}

struct Glyph {
  const char* name;
  OrderedTrace trace;
  int ends, branches, crosses, anchors; // expected node kinds
  int type1, type2, type0;              // expected segment types
};

inline std::vector<Glyph> glyphs() {
  const double pi = std::numbers::pi;
  return {
      {"line", strokes({segment({0, 0}, {30, 0})}), 2, 0, 0, 0, 1, 0, 0},
      {"T", strokes({segment({0, 0}, {30, 0}), segment({15, 0}, {15, 20})}), 3, 1, 0, 0, 3, 0, 0},
      {"plus", strokes({segment({0, 15}, {30, 15}), segment({15, 0}, {15, 30})}), 4, 0, 1, 0, 4, 0, 0},
      {"ring", strokes({circle({0, 0}, 10)}), 0, 0, 0, 1, 0, 0, 1},
      {"lollipop", strokes({circle({0, 0}, 8, pi / 2), segment({0, 8}, {0, 24})}), 1, 1, 0, 0, 1, 0, 1},
      {"figure-eight", strokes({figure_eight()}), 0, 0, 1, 0, 0, 0, 2},
  };
}

inline hwr::SegmentGraph glyph_graph(const OrderedTrace& tr, hwr::BinaryImage* ink = nullptr) {
  const hwr::SynthConfig cfg;
  const auto r = hwr::rasterize(tr, cfg);
  if (ink) *ink = r.image;
  return hwr::build_segment_graph(hwr::prune_spurs(hwr::skeletonize(r.image), 4));
}

} // namespace testing
