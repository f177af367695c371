#include "hwr/imaging.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <queue>

namespace hwr {

namespace {

void require_valid(const GrayImage& img) {
  if (img.empty() || img.width() <= 0 || img.height() <= 0)
    throw InvalidInput("binarize: empty image");
}

std::array<long, 256> histogram(const GrayImage& img) {
  std::array<long, 256> h{};
  for (auto s : img.samples()) ++h[s];
  return h;
}

// Neighbour values in x1..x8 order (E, NE, N, NW, W, SW, S, SE).
std::array<int, 8> ring(const BinaryImage& img, int x, int y) {
  std::array<int, 8> n{};
  for (int k = 0; k < 8; ++k) n[k] = img.at(x + kDx8[k], y + kDy8[k]) ? 1 : 0;
  return n;
}

int neighbour_count(const std::array<int, 8>& n) {
  int b = 0;
  for (int v : n) b += v;
  return b;
}

} // namespace

int otsu_threshold(const GrayImage& img) {
  require_valid(img);
  const auto hist = histogram(img);
  const int occupied = static_cast<int>(std::count_if(hist.begin(), hist.end(), [](long c) { return c > 0; }));
  if (occupied <= 1) return 127;

  const double total = static_cast<double>(img.samples().size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += static_cast<double>(i) * hist[i];

  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_t = 127;
  for (int t = 0; t < 255; ++t) {
    w0 += hist[t];
    sum0 += static_cast<double>(t) * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

BinaryImage binarize(const GrayImage& img, const BinarizeMethod& method) {
  require_valid(img);
  const int threshold = std::visit(
      [&](const auto& m) -> int {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, binarization::Fixed>)
          return m.threshold;
        else
          return otsu_threshold(img);
      },
      method);
  BinaryImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img(x, y) <= threshold) out.set(x, y);
  return out;
}

BinaryImage denoise(const BinaryImage& img) {
  if (img.empty()) return img;
  BinaryImage out = img;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (img(x, y)) {
        if (neighbour_count(ring(img, x, y)) == 0) out.set(x, y, false);
      } else if (img.at(x + 1, y) && img.at(x - 1, y) && img.at(x, y + 1) && img.at(x, y - 1)) {
        out.set(x, y, true);
      }
    }
  }
  return out;
}

bool is_simple_point(const BinaryImage& img, int x, int y) {
  const auto n = ring(img, x, y);
  // Yokoi connectivity number for 8-connectivity.
  int nc = 0;
  for (int k = 0; k < 8; k += 2) {
    const int a = 1 - n[k];
    const int b = 1 - n[(k + 1) % 8];
    const int c = 1 - n[(k + 2) % 8];
    nc += a - a * b * c;
  }
  return nc == 1;
}

bool has_full_2x2_block(const BinaryImage& img) {
  for (int y = 0; y + 1 < img.height(); ++y)
    for (int x = 0; x + 1 < img.width(); ++x)
      if (img(x, y) && img(x + 1, y) && img(x, y + 1) && img(x + 1, y + 1)) return true;
  return false;
}

namespace {

// Zhang-Suen candidate test. Neighbour naming follows the classic P2..P9
// (N, NE, E, SE, S, SW, W, NW).
bool zhang_suen_candidate(const BinaryImage& img, int x, int y, int pass) {
  const int p2 = img.at(x, y - 1), p3 = img.at(x + 1, y - 1), p4 = img.at(x + 1, y);
  const int p5 = img.at(x + 1, y + 1), p6 = img.at(x, y + 1), p7 = img.at(x - 1, y + 1);
  const int p8 = img.at(x - 1, y), p9 = img.at(x - 1, y - 1);
  const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
  if (b < 2 || b > 6) return false;
  const int seq[9] = {p2, p3, p4, p5, p6, p7, p8, p9, p2};
  int a = 0;
  for (int i = 0; i < 8; ++i) a += (seq[i] == 0 && seq[i + 1] == 1);
  if (a != 1) return false;
  if (pass == 0) return p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0;
  return p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0;
}

bool removable(const BinaryImage& img, int x, int y) {
  return neighbour_count(ring(img, x, y)) >= 2 && is_simple_point(img, x, y);
}

bool is_staircase_corner(const BinaryImage& img, int x, int y) {
  const bool n = img.at(x, y - 1), e = img.at(x + 1, y), s = img.at(x, y + 1), w = img.at(x - 1, y);
  return (n && e) || (e && s) || (s && w) || (w && n);
}

bool full_block(const BinaryImage& img, int x, int y) {
  return img.at(x, y) && img.at(x + 1, y) && img.at(x, y + 1) && img.at(x + 1, y + 1);
}

bool block_near(const BinaryImage& img, int cx, int cy) {
  for (int y = cy - 3; y <= cy + 2; ++y)
    for (int x = cx - 3; x <= cx + 2; ++x)
      if (full_block(img, x, y)) return true;
  return false;
}

// Two diagonal strokes crossing can leave a 2x2 block with an arm on each
// corner, where every single deletion disconnects an arm. The block is broken
// by moving one of its pixels onto a neighbouring input ink pixel, keeping
// component and hole counts.
void untangle_blocks(BinaryImage& img, const BinaryImage& ink) {
  const std::size_t components = connected_components(img).size();
  const int holes = hole_count(img);
  for (int y = 0; y + 1 < img.height(); ++y)
    for (int x = 0; x + 1 < img.width(); ++x) {
      if (!full_block(img, x, y)) continue;
      bool fixed = false;
      for (int k = 0; k < 4 && !fixed; ++k) {
        const int px = x + (k & 1), py = y + (k >> 1);
        for (int d = 0; d < 8 && !fixed; ++d) {
          const int qx = px + kDx8[d], qy = py + kDy8[d];
          if (!img.inside(qx, qy) || img(qx, qy) || !ink(qx, qy)) continue;
          img.set(px, py, false);
          img.set(qx, qy, true);
          fixed = neighbour_count(ring(img, qx, qy)) >= 2 && !block_near(img, x + 1, y + 1) &&
                  !block_near(img, qx, qy) && connected_components(img).size() == components &&
                  hole_count(img) == holes;
          if (!fixed) {
            img.set(qx, qy, false);
            img.set(px, py, true);
          }
        }
      }
    }
}

} // namespace

Skeleton skeletonize(const BinaryImage& input) {
  if (input.empty()) return Skeleton{input};
  BinaryImage img = input;
  std::vector<PixelPos> candidates;
  for (bool changed = true; changed;) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      candidates.clear();
      for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
          if (img(x, y) && zhang_suen_candidate(img, x, y, pass)) candidates.push_back({x, y});
      for (const auto& p : candidates) {
        if (removable(img, p.x, p.y)) {
          img.set(p.x, p.y, false);
          changed = true;
        }
      }
    }
  }

  // Staircase corners and leftover 2x2 blocks.
  for (bool changed = true; changed;) {
    changed = false;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x)
        if (img(x, y) && is_staircase_corner(img, x, y) && removable(img, x, y)) {
          img.set(x, y, false);
          changed = true;
        }
  }
  untangle_blocks(img, input);
  return Skeleton{std::move(img)};
}

namespace {

std::vector<std::vector<PixelPos>> label_foreground(const BinaryImage& img) {
  std::vector<std::vector<PixelPos>> comps;
  if (img.empty()) return comps;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(img.width()) * img.height(), 0);
  auto idx = [&](int x, int y) { return static_cast<std::size_t>(y) * img.width() + x; };
  std::vector<PixelPos> stack;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (!img(x, y) || seen[idx(x, y)]) continue;
      std::vector<PixelPos> comp;
      stack.push_back({x, y});
      seen[idx(x, y)] = 1;
      while (!stack.empty()) {
        const PixelPos p = stack.back();
        stack.pop_back();
        comp.push_back(p);
        for (int k = 0; k < 8; ++k) {
          const int nx = p.x + kDx8[k], ny = p.y + kDy8[k];
          if (img.at(nx, ny) && !seen[idx(nx, ny)]) {
            seen[idx(nx, ny)] = 1;
            stack.push_back({nx, ny});
          }
        }
      }
      std::sort(comp.begin(), comp.end(), [](const PixelPos& a, const PixelPos& b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
      });
      comps.push_back(std::move(comp));
    }
  }
  return comps;
}

ConnectedComponent describe(std::vector<PixelPos> pixels) {
  ConnectedComponent c;
  c.area = static_cast<long>(pixels.size());
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pixels) {
    c.bbox.extend(p.x, p.y);
    mean += Eigen::Vector2d(p.x, p.y);
  }
  mean /= static_cast<double>(c.area);
  // Each pixel is a unit square: add its own second moment (1/12) per axis.
  Eigen::Matrix2d cov = Eigen::Matrix2d::Identity() / 12.0;
  for (const auto& p : pixels) {
    const Eigen::Vector2d d = Eigen::Vector2d(p.x, p.y) - mean;
    cov += d * d.transpose() / static_cast<double>(c.area);
  }
  const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(cov, Eigen::EigenvaluesOnly).eigenvalues();
  c.centroid = mean;
  c.eccentricity = std::max(1.0, std::sqrt(ev(1) / ev(0)));
  c.pixels = std::move(pixels);
  return c;
}

} // namespace

std::vector<ConnectedComponent> connected_components(const BinaryImage& img) {
  std::vector<ConnectedComponent> out;
  for (auto& comp : label_foreground(img)) out.push_back(describe(std::move(comp)));
  std::stable_sort(out.begin(), out.end(), [](const ConnectedComponent& a, const ConnectedComponent& b) {
    if (a.bbox.x0 != b.bbox.x0) return a.bbox.x0 > b.bbox.x0;
    return a.bbox.y0 < b.bbox.y0;
  });
  return out;
}

int hole_count(const BinaryImage& img) {
  if (img.empty()) return 0;
  // Pad by one so the outer background is a single region.
  const int w = img.width() + 2, h = img.height() + 2;
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * h, 0);
  auto bg = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && !img.at(x - 1, y - 1); };
  auto idx = [&](int x, int y) { return static_cast<std::size_t>(y) * w + x; };
  int regions = 0;
  std::vector<PixelPos> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!bg(x, y) || seen[idx(x, y)]) continue;
      ++regions;
      stack.push_back({x, y});
      seen[idx(x, y)] = 1;
      while (!stack.empty()) {
        const PixelPos p = stack.back();
        stack.pop_back();
        constexpr int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = p.x + dx[k], ny = p.y + dy[k];
          if (bg(nx, ny) && !seen[idx(nx, ny)]) {
            seen[idx(nx, ny)] = 1;
            stack.push_back({nx, ny});
          }
        }
      }
    }
  }
  return regions - 1;
}

int euler_number(const BinaryImage& img) {
  return static_cast<int>(label_foreground(img).size()) - hole_count(img);
}

BinaryImage remove_diacritics(const BinaryImage& img, const DiacriticOptions& opts) {
  auto comps = connected_components(img);
  if (comps.size() <= 1) return img;
  const auto largest = std::max_element(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
    return a.area < b.area;
  });
  const Box body = largest->bbox;
  const double limit = opts.small_ratio * static_cast<double>(largest->area);
  BinaryImage out = img;
  for (const auto& c : comps) {
    const bool small = static_cast<double>(c.area) < limit;
    const bool outside_band = c.bbox.y1 < body.y0 || c.bbox.y0 > body.y1;
    if (small && outside_band)
      for (const auto& p : c.pixels) out.set(p.x, p.y, false);
  }
  return out;
}

} // namespace hwr
