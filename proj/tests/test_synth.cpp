#include <doctest.h>

#include <fstream>

#include "hwr/model_io.hpp"
#include "hwr/pipeline.hpp"

using namespace hwr;

TEST_CASE("vocabulary matches the checked-in fixtures") {
  const std::filesystem::path dir = HWR_DATA_DIR "/vocabulary";
  std::ifstream idx(dir / "labels.txt");
  std::vector<std::string> labels;
  for (std::string l; std::getline(idx, l);) labels.push_back(l);
  const auto voc = vocabulary();
  REQUIRE(voc.size() == labels.size());
  for (std::size_t i = 0; i < voc.size(); ++i) {
    CAPTURE(labels[i]);
    CHECK(voc[i].first == labels[i]);
    const auto ref = read_model_json(dir / (labels[i] + ".model.json"));
    REQUIRE(ref.strokes.size() == voc[i].second.strokes.size());
    CHECK(ref.strokes.size() >= 3);
    CHECK(ref.strokes.size() <= 8);
    for (std::size_t k = 0; k < ref.strokes.size(); ++k) {
      const auto &a = ref.strokes[k], &b = voc[i].second.strokes[k];
      CHECK(a.beta.t0 == b.beta.t0);
      CHECK(a.beta.t1 == b.beta.t1);
      CHECK(a.beta.k == b.beta.k);
      CHECK(a.ellipse.center == b.ellipse.center);
      CHECK(a.ellipse.a == b.ellipse.a);
      CHECK(a.arc0 == b.arc0);
      CHECK(a.arc1 == b.arc1);
    }
  }
}

TEST_CASE("seeds are reproducible and streams are distinct") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
  const auto m = vocabulary()[0].second;
  SynthConfig cfg;
  cfg.noise_sigma = 0.5;
  const auto a = gen_word(m, cfg, 42), b = gen_word(m, cfg, 42), c = gen_word(m, cfg, 43);
  CHECK(a.trajectory.points == b.trajectory.points);
  CHECK(a.trajectory.points != c.trajectory.points);
  PipelineConfig pc;
  CHECK(instance_seed(pc, 0, 0) != template_seed(pc, 0, 0));
}

TEST_CASE("noise-free words lie on their model") {
  const auto m = vocabulary()[5].second;
  SynthConfig cfg;
  const auto gt = gen_word(m, cfg, 0);
  CHECK((gt.trajectory.points.front() - m.strokes.front().start()).norm() < 1e-9);
  CHECK((gt.trajectory.points.back() - m.strokes.back().end()).norm() < 1e-6);
}

TEST_CASE("raster ink stays within half a stroke width of the pen") {
  SynthConfig cfg;
  const auto gt = gen_word(vocabulary()[2].second, cfg, 0);
  const auto r = rasterize(gt.trajectory, cfg);
  const auto tr = to_pixel_frame(gt.trajectory, r.origin);
  const double half = cfg.stroke_width / 2.0;
  for (const auto& p : r.image.pixels()) {
    const Point c(p.x, p.y);
    double best = 1e9;
    for (std::size_t s = 0; s < tr.stroke_count(); ++s) {
      const auto pts = tr.stroke(s);
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const Point d = pts[i + 1] - pts[i];
        const double t = d.squaredNorm() > 0 ? std::clamp((c - pts[i]).dot(d) / d.squaredNorm(), 0.0, 1.0) : 0.0;
        best = std::min(best, (pts[i] + t * d - c).norm());
      }
    }
    CHECK(best <= half + 1e-9);
  }
}

TEST_CASE("random words honour their stroke count and start on the right") {
  for (int n = 3; n <= 8; ++n) {
    const auto m = random_word_model(n, derive_seed(5, n));
    CHECK(m.strokes.size() == static_cast<std::size_t>(n));
    const Point start = m.strokes.front().start();
    const auto r = reconstruct(m, 500);
    for (const auto& p : r.trace) CHECK(p.x() <= start.x() + 1e-9);
  }
}

TEST_CASE("envelope truth holds every region kind") {
  PipelineConfig cfg;
  const auto env = gen_envelope(envelope_words(cfg, 9, 1), cfg.synth, 9);
  std::map<std::string, int> kinds;
  for (const auto& r : env.truth.layout) ++kinds[r.kind];
  CHECK(kinds["border"] == 1);
  CHECK(kinds["stamp"] >= 1);
  CHECK(kinds["address"] == 1);
  CHECK(kinds["code"] == 1);
  CHECK(kinds["city"] == 1);
  CHECK(kinds["line"] >= 1);
  CHECK(env.image.width() == EnvelopeConfig{}.width);
}
