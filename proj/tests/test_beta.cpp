#include <doctest.h>

#include <random>
#include <sstream>

#include "helpers.hpp"
#include "hwr/beta_elliptic.hpp"
#include "hwr/model_io.hpp"

using namespace hwr;

namespace {

VelocityProfile sampled(const std::vector<BetaParams>& bumps, double dt, std::size_t n) {
  VelocityProfile vp;
  vp.dt = dt;
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0;
    for (const auto& b : bumps) v += beta_eval(static_cast<double>(i) * dt, b);
    vp.v.push_back(v);
    vp.point_of.push_back(static_cast<long>(i));
  }
  return vp;
}

double simpson(const BetaParams& b, int n = 20000) {
  const double h = (b.t1 - b.t0) / n;
  double s = beta_eval(b.t0, b) + beta_eval(b.t1, b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * beta_eval(b.t0 + i * h, b);
  return s * h / 3;
}

BetaParams bp(double t0, double t1, double p, double q, double k) {
  BetaParams b;
  b.t0 = t0, b.t1 = t1, b.p = p, b.q = q, b.k = k;
  return b;
}

} // namespace

TEST_CASE("beta profile peaks at tc with height k") {
  const auto b = bp(1, 4, 2, 3, 2.5);
  const double tc = inflexion_time(b);
  CHECK(tc == doctest::Approx((2 * 4 + 3 * 1) / 5.0));
  CHECK(beta_eval(tc, b) == doctest::Approx(2.5));
  CHECK(beta_eval(0.5, b) == 0.0);
  CHECK(beta_eval(4.5, b) == 0.0);
  CHECK(beta_eval(tc - 0.01, b) < 2.5);
  CHECK(beta_eval(tc + 0.01, b) < 2.5);
  CHECK_THROWS_AS(inflexion_time(bp(2, 1, 2, 2, 1)), InvalidInput);
}

TEST_CASE("beta integral agrees with quadrature") {
  for (const auto& b : {bp(0, 1, 2, 2, 1), bp(3, 7.5, 1.3, 4.2, 0.7), bp(-2, 5, 6, 1.5, 3)})
    CHECK(beta_integral(b) == doctest::Approx(simpson(b)).epsilon(1e-8));
}

TEST_CASE("cost gradient matches central differences") {
  const auto truth = bp(0.2, 5.1, 2.2, 3.1, 1.7);
  const auto guess = bp(0.4, 4.8, 2.6, 2.7, 1.5);
  std::vector<double> t, v;
  for (int i = 0; i <= 60; ++i) {
    t.push_back(i * 0.09);
    v.push_back(beta_eval(t.back(), truth));
  }
  auto cost = [&](const BetaParams& b) {
    double c = 0;
    for (std::size_t i = 0; i < t.size(); ++i) c += 0.5 * std::pow(beta_eval(t[i], b) - v[i], 2);
    return c;
  };
  const auto g = beta_cost_gradient(guess, t, v);
  for (int j = 0; j < 5; ++j) {
    auto hi = guess, lo = guess;
    double* ph[5] = {&hi.t0, &hi.t1, &hi.p, &hi.q, &hi.k};
    double* pl[5] = {&lo.t0, &lo.t1, &lo.p, &lo.q, &lo.k};
    *ph[j] += 1e-6;
    *pl[j] -= 1e-6;
    CHECK(g[j] == doctest::Approx((cost(hi) - cost(lo)) / 2e-6).epsilon(1e-5));
  }
}

TEST_CASE("fit_beta recovers a noise-free profile") {
  const auto truth = bp(0, 8, 2.5, 3.5, 2);
  const auto vp = sampled({truth}, 0.02, 401);
  const auto f = fit_beta(vp, {0, 400});
  CHECK(f.params.t1 == doctest::Approx(8).epsilon(1e-6));
  CHECK(f.params.p == doctest::Approx(2.5).epsilon(1e-6));
  CHECK(f.params.q == doctest::Approx(3.5).epsilon(1e-6));
  CHECK(f.params.k == doctest::Approx(2).epsilon(1e-6));
}

TEST_CASE("fit_beta rejects a flat profile") {
  VelocityProfile vp;
  vp.v.assign(50, 0.0);
  vp.point_of.assign(50, 0);
  CHECK_THROWS_AS(fit_beta(vp, {0, 49}), FitFailure);
}

TEST_CASE("two separated bumps give two stroke intervals") {
  const auto vp = sampled({bp(0, 10, 2, 2, 1), bp(9, 20, 2, 2, 1.5)}, 0.1, 201);
  const auto iv = segment_strokes(vp);
  REQUIRE(iv.size() == 2);
  CHECK(iv[0].second == iv[1].first);
  CHECK(vp.time(iv[0].second) == doctest::Approx(9.5).epsilon(0.03));
}

TEST_CASE("ellipse fit is exact on points of an ellipse") {
  EllipseParams e;
  e.center = Point(3, -2);
  e.a = 9;
  e.b = 4;
  e.theta = 0.7;
  Polyline pts;
  for (int i = 0; i < 20; ++i) pts.push_back(ellipse_eval(0.3 + 0.2 * i, e));
  const auto f = fit_ellipse(pts);
  CHECK(f.ellipse.a == doctest::Approx(9).epsilon(1e-8));
  CHECK(f.ellipse.b == doctest::Approx(4).epsilon(1e-8));
  CHECK(f.ellipse.theta == doctest::Approx(0.7).epsilon(1e-8));
  CHECK((f.ellipse.center - e.center).norm() < 1e-8);
  CHECK(f.residual < 1e-10);
  const auto [a0, a1] = arc_angles(pts, f.ellipse);
  CHECK((ellipse_eval(a0, f.ellipse) - pts.front()).norm() < 1e-8);
  CHECK((ellipse_eval(a1, f.ellipse) - pts.back()).norm() < 1e-8);
  CHECK(a1 > a0);
  const Polyline line = testing::segment({0, 0}, {10, 10}, 10);
  CHECK_THROWS_AS(fit_ellipse(line), DegenerateGeometry);
}

TEST_CASE("reconstruction ends where the arcs end") {
  BetaEllipticModel m;
  Stroke s;
  s.beta = bp(0, 2, 2, 2, 5);
  s.ellipse.a = 10;
  s.ellipse.b = 6;
  s.arc0 = 0;
  s.arc1 = 2;
  m.strokes.push_back(s);
  s.beta = bp(1.5, 3.5, 3, 2, 4);
  s.ellipse.center = s.end() - ellipse_eval(-1.0, s.ellipse) + s.ellipse.center;
  s.arc0 = -1;
  s.arc1 = 0.5;
  m.strokes.push_back(s);
  m.validate();
  const auto r = reconstruct(m, 2001);
  CHECK((r.trace.front() - m.strokes[0].start()).norm() < 1e-9);
  CHECK((r.trace.back() - m.strokes[1].end()).norm() < 1e-6);
  const auto v = model_velocity(m, r.t);
  for (std::size_t i = 0; i < v.size(); i += 100) CHECK(r.velocity[i] == doctest::Approx(v[i]));
}

TEST_CASE("snr_db definition") {
  const std::vector<double> ref{1, 2, 3}, rec{1.1, 2, 2.9};
  CHECK(snr_db(ref, rec) == doctest::Approx(10 * std::log10(14 / 0.02)));
}

TEST_CASE("fit_model on a generated word reconstructs its velocity") {
  const auto model = vocabulary().front().second;
  SynthConfig cfg;
  const auto gt = gen_word(model, cfg, 0);
  ResampledTrace rs;
  static_cast<OrderedTrace&>(rs) = gt.trajectory;
  const auto vp = estimate_velocity(rs, sample_step(model));
  const auto fit = fit_model(rs, vp);
  CHECK(fit.snr >= 15.0);
  CHECK(fit.model.strokes.size() >= 2);
  CHECK(fit.velocity.size() == vp.size());
}

TEST_CASE("model json round trip is bit exact") {
  const auto m = vocabulary()[3].second;
  std::stringstream io;
  write_model_json(m, io);
  const auto back = read_model_json(io);
  REQUIRE(back.strokes.size() == m.strokes.size());
  for (std::size_t i = 0; i < m.strokes.size(); ++i) {
    const auto &a = m.strokes[i], &b = back.strokes[i];
    CHECK(a.beta.t0 == b.beta.t0);
    CHECK(a.beta.p == b.beta.p);
    CHECK(a.beta.k == b.beta.k);
    CHECK(a.ellipse.center == b.ellipse.center);
    CHECK(a.ellipse.theta == b.ellipse.theta);
    CHECK(a.arc1 == b.arc1);
  }
  std::stringstream bad(R"({"strokes": [{"beta": {"t0": 1}}]})");
  CHECK_THROWS_AS(read_model_json(bad), InvalidInput);
}
