#include <doctest.h>

#include <numeric>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "hwr/trajectory.hpp"

using namespace hwr;

namespace {

double cv(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size())) / m;
}

} // namespace

TEST_CASE("trace file round trip is exact") {
  auto tr = testing::strokes({testing::segment({0.1, 0.2}, {3.3, 1.0 / 3.0}, 7), testing::circle({5, 5}, 2.5, 0.3, 11)});
  std::stringstream io;
  write_trace(tr, io);
  const auto back = read_trace(io);
  CHECK(back.breaks == tr.breaks);
  REQUIRE(back.points.size() == tr.points.size());
  for (std::size_t i = 0; i < tr.points.size(); ++i) CHECK(back.points[i] == tr.points[i]);
  std::stringstream bad("TRACE v1\n1 2\n");
  CHECK_THROWS_AS(read_trace(bad), InvalidInput);
}

TEST_CASE("path length and curvature of a circle") {
  const auto c = testing::circle({0, 0}, 20, 0, 2000);
  CHECK(path_length(c) == doctest::Approx(2 * std::numbers::pi * 20).epsilon(1e-4));
  const auto k = discrete_curvature(c, 3.0);
  for (std::size_t i = 100; i < 1900; i += 100) CHECK(std::abs(k[i]) == doctest::Approx(1.0 / 20).epsilon(0.02));
}

TEST_CASE("dtw of a translated copy is the translation length") {
  const auto a = testing::circle({0, 0}, 10, 0, 50);
  Polyline b = a;
  for (auto& p : b) p += Point(0.3, 0.4);
  CHECK(dtw_mean_error(a, a) == 0.0);
  CHECK(dtw_mean_error(a, b) == doctest::Approx(0.5));
}

TEST_CASE("constant-speed line has flat velocity away from the taper") {
  const auto line = testing::strokes({testing::segment({0, 0}, {1000, 0}, 1000)});
  const auto rs = resample(line);
  const auto vp = estimate_velocity(rs);
  CHECK(cv(vp.v) < 0.05);
  CHECK(rs.points.front() == line.points.front());
  CHECK((rs.points.back() - line.points.back()).norm() < 1e-9);
}

TEST_CASE("resampling is denser on curves and near ends") {
  const auto line = resample(testing::strokes({testing::segment({0, 0}, {200, 0}, 400)}));
  const auto arc = resample(testing::strokes({testing::circle({0, 0}, 5, 0, 400)}));
  const double line_step = path_length(line.points) / static_cast<double>(line.points.size() - 1);
  const double arc_step = path_length(arc.points) / static_cast<double>(arc.points.size() - 1);
  CHECK(arc_step < 0.8 * line_step);
  const double end_step = (line.points[1] - line.points[0]).norm();
  const double mid_step = (line.points[line.points.size() / 2 + 1] - line.points[line.points.size() / 2]).norm();
  CHECK(end_step < mid_step);
}

TEST_CASE("velocity has a zero at every pen-up and drops point-less strokes") {
  const auto tr = testing::strokes({testing::segment({0, 0}, {50, 0}), testing::segment({60, 0}, {110, 0}),
                                    Polyline{Point(200, 0)}});
  std::vector<std::string> warnings;
  const auto rs = resample(tr, {}, &warnings);
  CHECK(rs.stroke_count() == 2);
  CHECK(warnings.size() == 1);
  const auto vp = estimate_velocity(rs);
  int zeros = 0;
  for (std::size_t i = 0; i < vp.size(); ++i)
    if (vp.point_of[i] < 0) {
      ++zeros;
      CHECK(vp.v[i] == 0.0);
    }
  CHECK(zeros == 1);
  CHECK(vp.size() == rs.points.size() - 2 + 1);
}

TEST_CASE("single-chain words are recovered in exact pixel order") {
  SynthConfig cfg;
  for (int i = 0; i < 4; ++i) {
    CAPTURE(i);
    const auto m = random_chain_model(3 + i, derive_seed(11, i));
    const auto gt = gen_word(m, cfg, 0);
    const auto r = rasterize(gt.trajectory, cfg);
    const auto tr = recover_trace(r.image);
    const auto sk = prune_spurs(skeletonize(remove_diacritics(denoise(r.image))), 4).image;
    REQUIRE(tr.stroke_count() == 1);
    REQUIRE(tr.points.size() == sk.pixels().size());
    // consecutive points are 8-neighbours and no pixel repeats
    std::set<std::pair<int, int>> seen;
    for (std::size_t k = 0; k < tr.points.size(); ++k) {
      const Point& p = tr.points[k];
      CHECK(sk.at(static_cast<int>(p.x()), static_cast<int>(p.y())));
      seen.insert({static_cast<int>(p.x()), static_cast<int>(p.y())});
      if (k) CHECK((p - tr.points[k - 1]).lpNorm<Eigen::Infinity>() == 1.0);
    }
    CHECK(seen.size() == tr.points.size());
  }
}

TEST_CASE("recovered words follow the pen within a stroke width") {
  SynthConfig cfg;
  for (int i = 0; i < 6; ++i) {
    CAPTURE(i);
    const auto m = random_word_model(3 + i, derive_seed(12, i));
    const auto gt = gen_word(m, cfg, 0);
    const auto r = rasterize(gt.trajectory, cfg);
    const auto truth = to_pixel_frame(gt.trajectory, r.origin);
    CHECK(dtw_mean_error(recover_trace(r.image).points, truth.points) <= cfg.stroke_width);
  }
}
