#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "hwr/image.hpp"
#include "hwr/imaging.hpp"

using namespace hwr;

namespace {

BinaryImage rect(int w, int h, Box b) {
  BinaryImage img(w, h);
  for (int y = b.y0; y <= b.y1; ++y)
    for (int x = b.x0; x <= b.x1; ++x) img.set(x, y);
  return img;
}

// Brute-force Otsu: first t maximizing w0 w1 (mu0 - mu1)^2.
int otsu_oracle(const GrayImage& g) {
  double best = -1;
  int bt = 127;
  for (int t = 0; t < 255; ++t) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (auto v : g.samples()) {
      if (v <= t) n0 += 1, s0 += v;
      else n1 += 1, s1 += v;
    }
    if (n0 == 0 || n1 == 0) continue;
    const double n = n0 + n1, d = s0 / n0 - s1 / n1;
    const double var = (n0 / n) * (n1 / n) * d * d;
    if (var > best + 1e-12) best = var, bt = t;
  }
  return bt;
}

} // namespace

TEST_CASE("box iou") {
  const Box a{0, 0, 9, 9}, b{5, 0, 14, 9};
  CHECK(iou(a, a) == doctest::Approx(1.0));
  CHECK(iou(a, b) == doctest::Approx(50.0 / 150.0));
  CHECK(iou(a, Box{20, 20, 30, 30}) == 0.0);
}

TEST_CASE("otsu matches an exhaustive search") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    GrayImage g(40, 30);
    std::normal_distribution<> dark(60 + 10 * trial, 15), light(200, 20);
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x)
        g(x, y) = static_cast<std::uint8_t>(std::clamp((x < 12 ? dark(rng) : light(rng)), 0.0, 255.0));
    CHECK(otsu_threshold(g) == otsu_oracle(g));
  }
  CHECK(otsu_threshold(GrayImage(5, 5, 200)) == 127);
}

TEST_CASE("binarize marks dark samples as ink") {
  GrayImage g(3, 1);
  g(0, 0) = 10;
  g(1, 0) = 128;
  g(2, 0) = 129;
  const auto b = binarize(g, binarization::Fixed{128});
  CHECK(b(0, 0));
  CHECK(b(1, 0));
  CHECK_FALSE(b(2, 0));
}

TEST_CASE("denoise drops isolated pixels and fills pinholes, idempotently") {
  auto img = rect(20, 20, {2, 2, 10, 10});
  img.set(6, 6, false);
  img.set(15, 15);
  const auto d = denoise(img);
  CHECK(d(6, 6));
  CHECK_FALSE(d(15, 15));
  CHECK(d.pixels() == denoise(d).pixels());
}

TEST_CASE("netpbm round trip") {
  std::mt19937 rng(1);
  GrayImage g(17, 9);
  BinaryImage b(17, 9);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 17; ++x) {
      g(x, y) = static_cast<std::uint8_t>(rng());
      b.set(x, y, rng() & 1);
    }
  std::stringstream sg, sb;
  write_pgm(g, sg);
  write_pbm(b, sb);
  CHECK(read_pgm(sg).samples() == g.samples());
  CHECK(read_pbm(sb).pixels() == b.pixels());
  std::stringstream bad("P3\n1 1\n255\n0 0 0\n");
  CHECK_THROWS_AS(read_pgm(bad), InvalidInput);
}

TEST_CASE("components, holes and euler number") {
  BinaryImage img(30, 20);
  for (int x = 2; x <= 10; ++x) img.set(x, 2), img.set(x, 10);
  for (int y = 2; y <= 10; ++y) img.set(2, y), img.set(10, y);
  for (int y = 5; y <= 8; ++y)
    for (int x = 20; x <= 24; ++x) img.set(x, y);
  const auto cc = connected_components(img);
  REQUIRE(cc.size() == 2);
  CHECK(cc[0].bbox == Box{20, 5, 24, 8}); // right to left
  CHECK(cc[0].area == 20);
  CHECK(hole_count(img) == 1);
  CHECK(euler_number(img) == 1);
}

TEST_CASE("skeleton is thin and keeps topology") {
  for (const auto& g : testing::glyphs()) {
    CAPTURE(std::string(g.name));
    BinaryImage ink;
    testing::glyph_graph(g.trace, &ink);
    const auto sk = skeletonize(ink);
    CHECK_FALSE(has_full_2x2_block(sk.image));
    CHECK(connected_components(sk.image).size() == connected_components(ink).size());
    CHECK(hole_count(sk.image) == hole_count(ink));
  }
  const auto block = rect(40, 20, {5, 5, 34, 14});
  const auto sk = skeletonize(block);
  CHECK(connected_components(sk.image).size() == 1);
  CHECK(hole_count(sk.image) == 0);
}

TEST_CASE("diacritics above the main body are removed") {
  auto img = rect(60, 40, {5, 20, 55, 24});
  for (int y = 5; y <= 7; ++y)
    for (int x = 30; x <= 32; ++x) img.set(x, y);
  const auto out = remove_diacritics(img);
  CHECK_FALSE(out(31, 6));
  CHECK(out(30, 22));
  // a small blob inside the body band stays
  auto inside = img;
  inside.set(2, 22);
  inside.set(2, 21);
  CHECK(remove_diacritics(inside)(2, 22));
}
