#include "hwr/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace hwr {

namespace {

constexpr double kPi = std::numbers::pi;

using Rng = std::mt19937_64;

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

// theta into [0, pi); a half turn of the axes is absorbed by the arc angles.
void normalize_axes(Stroke& s) {
  while (s.ellipse.theta >= kPi) {
    s.ellipse.theta -= kPi;
    s.arc0 += kPi;
    s.arc1 += kPi;
  }
  while (s.ellipse.theta < 0.0) {
    s.ellipse.theta += kPi;
    s.arc0 -= kPi;
    s.arc1 -= kPi;
  }
}

double arc_length(const Stroke& s) {
  constexpr int steps = 256;
  double len = 0.0;
  Point prev = s.start();
  for (int i = 1; i <= steps; ++i) {
    const Point cur = ellipse_eval(s.arc0 + (s.arc1 - s.arc0) * i / steps, s.ellipse);
    len += (cur - prev).norm();
    prev = cur;
  }
  return len;
}

// Assigns Beta timing so each stroke's Beta integral equals its arc length.
void assign_timing(std::vector<Stroke>& strokes, Rng& rng, double speed) {
  double t0 = 0.0;
  for (auto& s : strokes) {
    const double len = std::max(arc_length(s), 1e-3);
    const double d = len / speed * uniform(rng, 0.85, 1.15);
    s.beta.t0 = t0;
    s.beta.t1 = t0 + d;
    s.beta.p = uniform(rng, 1.6, 3.2);
    s.beta.q = uniform(rng, 1.6, 3.2);
    s.beta.k = 1.0;
    s.beta.k = len / beta_integral(s.beta);
    t0 += d * uniform(rng, 0.6, 0.75);
  }
}

// Dense geometric samples of the chained arcs (about 1 px apart) with
// cumulative arc length and unit tangents.
struct Samples {
  Polyline pts;
  std::vector<double> s;
  std::vector<Point> tangent;
};

Samples sample_chain(const std::vector<Stroke>& strokes) {
  Samples out;
  Point cur = strokes.front().start();
  double acc = 0.0;
  for (const auto& st : strokes) {
    const int steps = std::max(2, static_cast<int>(std::ceil(arc_length(st))));
    const Point base = st.start();
    for (int i = (out.pts.empty() ? 0 : 1); i <= steps; ++i) {
      const double ang = st.arc0 + (st.arc1 - st.arc0) * i / steps;
      const Point p = cur + ellipse_eval(ang, st.ellipse) - base;
      if (!out.pts.empty()) acc += (p - out.pts.back()).norm();
      out.pts.push_back(p);
      out.s.push_back(acc);
    }
    cur = out.pts.back();
  }
  const std::size_t n = out.pts.size();
  out.tangent.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point d = out.pts[std::min(i + 1, n - 1)] - out.pts[i > 0 ? i - 1 : 0];
    out.tangent[i] = d.norm() > 0 ? Point(d / d.norm()) : Point(1, 0);
  }
  return out;
}

bool acceptable(const Samples& sm, double width, bool open_chain) {
  const std::size_t n = sm.pts.size();
  if (n < 3) return false;
  const double x_start = sm.pts.front().x();
  for (const auto& p : sm.pts)
    if (p.x() > x_start + 1e-9) return false;
  const double apart = 4.0 * width;
  for (std::size_t e : {std::size_t{0}, n - 1})
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(sm.s[j] - sm.s[e]) > apart && (sm.pts[j] - sm.pts[e]).norm() < 2.5 * width) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (sm.s[j] - sm.s[i] <= apart) continue;
      const double d = (sm.pts[j] - sm.pts[i]).norm();
      if (open_chain) {
        if (d < 3.0 * width) return false;
        continue;
      }
      if (d >= 1.5 * width) continue;
      const double c = std::abs(sm.tangent[i].dot(sm.tangent[j]));
      if (c > std::cos(40.0 * kPi / 180.0)) return false;
    }
  }
  // Cursive words run right to left along their length.
  const Point chord = sm.pts.back() - sm.pts.front();
  return -chord.x() >= 0.3 * sm.s.back();
}

// Eccentric angle where the stroke travels along `heading`.
double entry_angle(const EllipseParams& e, const Point& heading, double sign) {
  const Point h = to_ellipse_frame(Point(e.center + heading), e);
  return std::atan2(-sign * h.x() / e.a, sign * h.y() / e.b);
}

Point travel_direction(const Stroke& s) {
  const double sign = s.arc1 >= s.arc0 ? 1.0 : -1.0;
  const double c = std::cos(s.ellipse.theta), sn = std::sin(s.ellipse.theta);
  const double tx = -s.ellipse.a * std::sin(s.arc1), ty = s.ellipse.b * std::cos(s.arc1);
  const Point d = sign * Point(c * tx - sn * ty, sn * tx + c * ty);
  return d / d.norm();
}

BetaEllipticModel draw_word(int strokes, std::uint64_t seed, const WordShape& shape, bool open_chain) {
  if (strokes < 1) throw InvalidInput("word model: need at least one stroke");
  Rng rng(splitmix64(seed));
  for (int attempt = 0; attempt < shape.max_attempts; ++attempt) {
    std::vector<Stroke> st;
    Point heading(-1.0, 0.0);
    Point cur(0.0, 0.0);
    double sign = rng() % 2 ? 1.0 : -1.0;
    for (int i = 0; i < strokes; ++i) {
      Stroke s;
      const double a = uniform(rng, shape.min_axis, shape.max_axis);
      const double b_min = std::max(0.5 * a, std::sqrt(shape.stroke_width * a));
      s.ellipse.a = a;
      s.ellipse.b = std::min(a, uniform(rng, b_min, a));
      s.ellipse.theta = uniform(rng, 0.0, kPi);
      const bool loop = !open_chain && uniform(rng, 0.0, 1.0) < shape.loop_probability;
      if (i > 0 && !loop && uniform(rng, 0.0, 1.0) < 0.75) sign = -sign;
      const double sweep = loop ? uniform(rng, 1.5 * kPi, 1.75 * kPi) : uniform(rng, 0.4 * kPi, 0.8 * kPi);
      s.ellipse.center = Point::Zero();
      s.arc0 = entry_angle(s.ellipse, heading, sign);
      s.arc1 = s.arc0 + sign * sweep;
      s.ellipse.center = cur - ellipse_eval(s.arc0, s.ellipse);
      cur = s.end();
      heading = travel_direction(s);
      st.push_back(s);
    }
    // Turn the word about its start so it runs right to left overall.
    const Point origin = st.front().start();
    const Point chord = st.back().end() - origin;
    if (chord.norm() > 1e-6) {
      const double rot = kPi - std::atan2(chord.y(), chord.x()) + uniform(rng, -0.15, 0.15);
      const Eigen::Rotation2Dd r(rot);
      for (auto& s : st) {
        s.ellipse.center = origin + r * (s.ellipse.center - origin);
        s.ellipse.theta += rot;
        normalize_axes(s);
      }
    }
    if (!acceptable(sample_chain(st), shape.stroke_width, open_chain)) continue;
    assign_timing(st, rng, shape.speed);
    BetaEllipticModel m;
    m.strokes = std::move(st);
    m.validate();
    return m;
  }
  throw InvalidInput("word model: no acceptable sample for seed " + std::to_string(seed));
}

Stroke line_stroke(Point a, Point b) {
  Stroke s;
  const double len = (b - a).norm();
  const Point u = (b - a) / len;
  s.ellipse.a = len / 2.0;
  s.ellipse.b = 1e-6 * len;
  s.ellipse.center = 0.5 * (a + b);
  s.ellipse.theta = std::atan2(u.y(), u.x());
  s.arc0 = kPi;
  s.arc1 = 2 * kPi;
  normalize_axes(s);
  return s;
}

// Circular arc of radius r about c from angle f0 to f1 (y down).
Stroke circle_stroke(Point c, double r, double f0, double f1) {
  Stroke s;
  s.ellipse.a = s.ellipse.b = r;
  s.ellipse.center = c;
  s.arc0 = f0;
  s.arc1 = f1;
  return s;
}

} // namespace

void SynthConfig::validate() const {
  if (stroke_width < 1) throw ConfigError("stroke_width must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");
  if (!(resolution > 0.0)) throw ConfigError("resolution must be > 0");
  if (n_templates < 1) throw ConfigError("n_templates must be >= 1");
  if (n_instances < 1) throw ConfigError("n_instances must be >= 1");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ (index * 0xd1342543de82ef95ULL + 1));
}

double sample_step(const BetaEllipticModel& model) {
  if (model.strokes.empty()) return 1.0 / kSamplesPerUnit;
  double t0 = model.strokes.front().beta.t0, t1 = model.strokes.front().beta.t1;
  for (const auto& s : model.strokes) {
    t0 = std::min(t0, s.beta.t0);
    t1 = std::max(t1, s.beta.t1);
  }
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) * kSamplesPerUnit)) + 1;
  return (t1 - t0) / static_cast<double>(n - 1);
}

GroundTruth gen_word(const BetaEllipticModel& model, const SynthConfig& cfg, std::uint64_t seed, std::string label) {
  cfg.validate();
  if (model.strokes.empty()) throw InvalidInput("gen_word: empty model");
  model.validate();
  double t0 = model.strokes.front().beta.t0, t1 = model.strokes.front().beta.t1;
  for (const auto& s : model.strokes) {
    t0 = std::min(t0, s.beta.t0);
    t1 = std::max(t1, s.beta.t1);
  }
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) * kSamplesPerUnit)) + 1;
  auto rec = reconstruct(model, std::max<std::size_t>(n, 2));
  GroundTruth gt;
  gt.model = model;
  gt.label = std::move(label);
  gt.trajectory.points = std::move(rec.trace);
  if (cfg.noise_sigma > 0.0) {
    Rng rng(splitmix64(seed));
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (auto& p : gt.trajectory.points) {
      const double dx = noise(rng);
      const double dy = noise(rng);
      p += Point(dx, dy);
    }
  }
  return gt;
}

RasterWord rasterize(const OrderedTrace& tr, const SynthConfig& cfg) {
  cfg.validate();
  const int w = cfg.stroke_width;
  RasterWord out;
  if (tr.empty()) {
    out.image = BinaryImage(4 * w, 4 * w);
    return out;
  }
  Point lo = tr.points.front(), hi = tr.points.front();
  for (const auto& p : tr.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  out.origin = Point(std::floor(lo.x()) - 2 * w, std::floor(lo.y()) - 2 * w);
  const int width = static_cast<int>(std::ceil(hi.x()) - out.origin.x()) + 2 * w + 1;
  const int height = static_cast<int>(std::ceil(hi.y()) - out.origin.y()) + 2 * w + 1;
  out.image = BinaryImage(width, height);
  const double r = 0.5 * w + 1e-9;

  auto stamp_segment = [&](Point a, Point b) {
    a -= out.origin;
    b -= out.origin;
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - r)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - r)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + r)));
    const Point d = b - a;
    const double dd = d.squaredNorm();
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const Point c(x, y);
        const double t = dd > 0 ? std::clamp((c - a).dot(d) / dd, 0.0, 1.0) : 0.0;
        if ((c - (a + t * d)).norm() <= r) out.image.set(x, y);
      }
  };

  for (std::size_t s = 0; s < tr.stroke_count(); ++s) {
    const auto pts = tr.stroke(s);
    if (pts.size() == 1) stamp_segment(pts[0], pts[0]);
    for (std::size_t i = 1; i < pts.size(); ++i) stamp_segment(pts[i - 1], pts[i]);
  }
  return out;
}

OrderedTrace to_pixel_frame(const OrderedTrace& tr, const Point& origin) {
  OrderedTrace out = tr;
  for (auto& p : out.points) p -= origin;
  return out;
}

BetaEllipticModel random_word_model(int strokes, std::uint64_t seed, const WordShape& shape) {
  return draw_word(strokes, seed, shape, false);
}

BetaEllipticModel random_chain_model(int strokes, std::uint64_t seed, const WordShape& shape) {
  WordShape s = shape;
  s.loop_probability = 0.0;
  return draw_word(strokes, seed, s, true);
}

std::vector<std::pair<std::string, BetaEllipticModel>> vocabulary() {
  static const char* const names[] = {"tunis",  "sfax",      "sousse",   "kairouan", "bizerte",
                                      "gabes",  "ariana",    "gafsa",    "monastir", "benarous",
                                      "kasserine", "medenine", "nabeul", "tataouine", "beja",
                                      "jendouba", "mahdia",   "siliana",  "kebili",   "tozeur"};
  std::vector<std::pair<std::string, BetaEllipticModel>> out;
  for (int i = 0; i < 20; ++i)
    out.emplace_back(names[i], random_word_model(3 + i % 6, derive_seed(0x5eed0f0cab, static_cast<std::uint64_t>(i))));
  return out;
}

BetaEllipticModel digit_model(int d) {
  std::vector<Stroke> st;
  switch (d) {
    case 0: st = {circle_stroke({7, 10}, 7.5, -kPi / 2, 1.5 * kPi)}; break;
    case 1:
      st = {line_stroke({2, 6}, {8, 0}), line_stroke({8, 0}, {8, 19}), line_stroke({8, 19}, {1, 19}),
            line_stroke({1, 19}, {14, 19})};
      break;
    case 2:
      st = {circle_stroke({7, 6}, 6, kPi, 2.25 * kPi), line_stroke(Point(7, 6) + 6 * Point(std::cos(0.25 * kPi), std::sin(0.25 * kPi)), {1, 19}),
            line_stroke({1, 19}, {14, 19})};
      break;
    case 3: st = {circle_stroke({6, 5}, 5, -0.9 * kPi, 0.5 * kPi), circle_stroke({6, 15}, 5, -0.5 * kPi, 0.9 * kPi)}; break;
    case 4: st = {line_stroke({10, 20}, {10, 0}), line_stroke({10, 0}, {1, 14}), line_stroke({1, 14}, {14, 14})}; break;
    case 5:
      st = {line_stroke({13, 1}, {2, 1}), line_stroke({2, 1}, {2, 9}),
            circle_stroke({6, 14}, 5.5, -0.75 * kPi + 0.0, 0.8 * kPi)};
      break;
    case 6: st = {circle_stroke({12, 12}, 10, -0.6 * kPi, -1.0 * kPi), circle_stroke({7, 14}, 5, kPi, 3 * kPi)}; break;
    case 7: st = {line_stroke({1, 1}, {14, 1}), line_stroke({14, 1}, {6, 20}), line_stroke({6, 20}, {4, 20})}; break;
    case 8: st = {circle_stroke({7, 5}, 4.5, 0.5 * kPi, 2.5 * kPi), circle_stroke({7, 14.5}, 5, -0.5 * kPi, 1.5 * kPi)}; break;
    case 9: st = {circle_stroke({7, 6}, 5.5, 0.0, -2 * kPi), line_stroke({12.5, 6}, {12.5, 20})}; break;
    default: throw InvalidInput("digit_model: digit out of range");
  }
  Rng rng(static_cast<std::uint64_t>(d) + 1);
  for (auto& s : st) normalize_axes(s);
  assign_timing(st, rng, 30.0);
  BetaEllipticModel m;
  m.strokes = std::move(st);
  m.validate();
  return m;
}

namespace {

BinaryImage crop_to_ink(const BinaryImage& img) {
  const Box b = img.bounds();
  if (b.empty()) return BinaryImage(1, 1);
  return img.crop(b);
}

void blit(BinaryImage& dst, const BinaryImage& src, int x0, int y0) {
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x)
      if (src(x, y) && dst.inside(x0 + x, y0 + y)) dst.set(x0 + x, y0 + y);
}

Box placed(const BinaryImage& src, int x0, int y0) { return {x0, y0, x0 + src.width() - 1, y0 + src.height() - 1}; }

struct Piece {
  BinaryImage ink;
  std::string kind;
};

} // namespace

EnvelopeSample gen_envelope(const std::vector<GroundTruth>& addr_words, const SynthConfig& cfg, std::uint64_t seed,
                            const EnvelopeConfig& env) {
  cfg.validate();
  if (addr_words.empty()) throw InvalidInput("gen_envelope: need at least one word");
  Rng rng(splitmix64(seed));
  auto irange = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
  const int W = env.width, H = env.height;
  EnvelopeSample out;
  out.image = BinaryImage(W, H);
  out.frame_mask = BinaryImage(W, H);
  auto& layout = out.truth.layout;
  out.truth.label = addr_words.back().label;

  if (env.frame) {
    const int i0 = env.frame_inset, i1 = env.frame_inset + env.frame_thickness - 1;
    for (int y = i0; y <= H - 1 - i0; ++y)
      for (int x = i0; x <= W - 1 - i0; ++x) {
        const bool edge = y <= i1 || y >= H - 1 - i1 || x <= i1 || x >= W - 1 - i1;
        if (edge) {
          out.image.set(x, y);
          out.frame_mask.set(x, y);
        }
      }
    layout.push_back({{i0, i0, W - 1 - i0, H - 1 - i0}, "border"});
  }

  if (env.stamp) {
    const int sw = irange(90, 120), sh = irange(70, 95);
    const int x1 = W - irange(45, 70), y0 = irange(28, 40);
    const Box b{x1 - sw + 1, y0, x1, y0 + sh - 1};
    for (int y = b.y0; y <= b.y1; ++y)
      for (int x = b.x0; x <= b.x1; ++x) {
        const bool hole = (x - b.x0) % 5 == 2 && (y - b.y0) % 5 == 2;
        if (!hole) out.image.set(x, y);
      }
    layout.push_back({b, "stamp"});
  }

  auto word_ink = [&](const OrderedTrace& tr) { return crop_to_ink(rasterize(tr, cfg).image); };

  if (env.sender) {
    // Two short lines of small scribbles in the top-left band.
    Box sb;
    int y = irange(30, 40);
    const int x_right = irange(260, 320);
    for (int line = 0; line < 2; ++line) {
      int x = x_right, line_h = 0;
      const int words = irange(2, 3);
      for (int k = 0; k < words; ++k) {
        const auto m = random_chain_model(irange(2, 3), derive_seed(seed, 1000 + line * 10 + k),
                                          WordShape{4.0, 7.0, 0.0, 30.0, cfg.stroke_width, 2000});
        const auto ink = word_ink(gen_word(m, SynthConfig{cfg.seed, cfg.stroke_width}, 0).trajectory);
        const int x0 = x - ink.width() + 1;
        if (x0 < env.frame_inset + 30) break;
        blit(out.image, ink, x0, y);
        sb.extend(placed(ink, x0, y));
        line_h = std::max(line_h, ink.height());
        x = x0 - irange(14, 22);
      }
      y += line_h + irange(8, 12);
    }
    if (!sb.empty()) layout.push_back({sb, "sender"});
  }

  // Address lines: words above, then code group and city on the last line.
  std::vector<std::vector<Piece>> lines;
  const std::size_t others = addr_words.size() - 1;
  std::size_t next = 0;
  while (next < others) {
    const std::size_t take = std::min<std::size_t>(others - next, static_cast<std::size_t>(irange(1, 3)));
    std::vector<Piece> line;
    for (std::size_t k = 0; k < take; ++k)
      line.push_back({word_ink(addr_words[next + k].trajectory), "word"});
    lines.push_back(std::move(line));
    next += take;
  }
  {
    // Postal code: four digit glyphs packed into one word region.
    std::vector<BinaryImage> digits;
    int total = 0, h = 0;
    std::vector<int> gaps;
    for (int k = 0; k < 4; ++k) {
      const int dg = irange(0, 9);
      digits.push_back(word_ink(gen_word(digit_model(dg), SynthConfig{cfg.seed, cfg.stroke_width}, 0).trajectory));
      total += digits.back().width();
      h = std::max(h, digits.back().height());
      if (k < 3) {
        gaps.push_back(irange(3, 5));
        total += gaps.back();
      }
    }
    BinaryImage code(total, h);
    int x = 0;
    for (int k = 0; k < 4; ++k) {
      blit(code, digits[k], x, (h - digits[k].height()) / 2);
      x += digits[k].width() + (k < 3 ? gaps[k] : 0);
    }
    Piece city{word_ink(addr_words.back().trajectory), "city"};
    Piece cp{std::move(code), "code"};
    std::vector<Piece> last;
    if (irange(0, 1)) {
      last.push_back(std::move(city));
      last.push_back(std::move(cp));
    } else {
      last.push_back(std::move(cp));
      last.push_back(std::move(city));
    }
    lines.push_back(std::move(last));
  }

  // Word and line spacing scale with the writing height.
  auto spacing = [&](int h, double lo, double hi) {
    return irange(std::max(12, static_cast<int>(std::lround(lo * h))), std::max(16, static_cast<int>(std::lround(hi * h))));
  };
  std::vector<int> heights;
  for (const auto& line : lines) {
    int lh = 0;
    for (const auto& p : line) lh = std::max(lh, p.ink.height());
    heights.push_back(lh);
  }
  const int tallest = *std::max_element(heights.begin(), heights.end());
  int total_h = 0;
  std::vector<int> gaps;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    total_h += heights[l];
    if (l + 1 < lines.size()) {
      gaps.push_back(spacing(tallest, 0.5, 0.7));
      total_h += gaps.back();
    }
  }
  const int bottom_limit = H - env.frame_inset - env.frame_thickness - 20;
  const int top_min = static_cast<int>(0.42 * H);
  if (top_min + total_h > bottom_limit) throw LayoutError("gen_envelope: address block does not fit the canvas");
  int y = irange(top_min, std::max(top_min, std::min(bottom_limit - total_h, static_cast<int>(0.55 * H))));
  const int x_right = irange(static_cast<int>(0.70 * W), static_cast<int>(0.85 * W));
  const int left_limit = env.frame_inset + env.frame_thickness + 30;

  Box address;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    const int lh = heights[l];
    const int yc = y + lh / 2;
    int x = x_right - irange(0, 20);
    Box band;
    for (const auto& p : lines[l]) {
      const int x0 = x - p.ink.width() + 1;
      if (x0 < left_limit) throw LayoutError("gen_envelope: address line does not fit the canvas");
      const int y0 = yc - p.ink.height() / 2;
      blit(out.image, p.ink, x0, y0);
      const Box b = placed(p.ink, x0, y0);
      layout.push_back({b, p.kind});
      band.extend(b);
      x = x0 - 1 - spacing(lh, 0.6, 0.8);
    }
    layout.push_back({band, "line"});
    address.extend(band);
    y += lh + (l < gaps.size() ? gaps[l] : 0);
  }
  layout.push_back({address, "address"});
  return out;
}

} // namespace hwr
