// Acceptance suite: one PASS/FAIL line per criterion. `--only <name>` runs a
// single criterion (ctest registers each one separately).

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "helpers.hpp"
#include "hwr/envelope_layout.hpp"
#include "hwr/pipeline.hpp"

using namespace hwr;
namespace fs = std::filesystem;

namespace {

// Tolerances and sizes.
constexpr int kBetaDraws = 1000;
constexpr double kBetaPeakTol = 1e-9;
constexpr double kBetaSymTol = 1e-12;
constexpr double kBetaGrid = 1e-3; // x (t1 - t0)
constexpr int kMatcherPairs = 500;
constexpr int kMatcherMaxNodes = 6;
constexpr double kMatcherTol = 1e-12;
constexpr int kSelfGraphs = 100;
constexpr int kRoundTripWords = 50;
constexpr double kRoundTripShare = 0.90;
constexpr int kChainWords = 10;
constexpr int kFitExactDraws = 100;
constexpr double kFitExactTol = 1e-3;
constexpr int kFitNoiseSeeds = 100;
constexpr double kFitNoiseSigma = 0.03; // 1% of k = 3
constexpr double kFitNoiseTol = 0.05;
constexpr double kSnrMin = 15.0;
constexpr int kSnrRandomWords = 50;
constexpr double kRecognitionMin = 0.95;
constexpr int kEnvelopes = 100;
constexpr double kEnvelopeIou = 0.8;
constexpr double kEnvelopeIouShare = 0.90;
constexpr double kEnvelopeCountShare = 0.95;
constexpr double kEnvelopeFieldShare = 0.95;
constexpr double kFieldMatchIou = 0.5;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// ---------------------------------------------------------------------------

Outcome beta_law() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<> t0d(-5, 5), dd(0.1, 20), pd(0.5, 8), kd(0.1, 10);
  int peak_bad = 0, outside_bad = 0, argmax_bad = 0, sym_bad = 0;
  double worst_peak = 0, worst_sym = 0;
  for (int i = 0; i < kBetaDraws; ++i) {
    BetaParams b;
    b.t0 = t0d(rng);
    b.t1 = b.t0 + dd(rng);
    b.p = pd(rng);
    b.q = pd(rng);
    b.k = kd(rng);
    const double D = b.t1 - b.t0;
    const double tc = (b.p * b.t1 + b.q * b.t0) / (b.p + b.q);

    const double peak = std::abs(beta_eval(tc, b) - b.k) / b.k;
    worst_peak = std::max(worst_peak, peak);
    peak_bad += peak > kBetaPeakTol;

    for (double t : {b.t0 - 1e-9 * D, b.t0 - D, b.t1 + 1e-9 * D, b.t1 + 3 * D, std::nextafter(b.t0, -1e300)})
      outside_bad += beta_eval(t, b) != 0.0;

    const int n = static_cast<int>(std::lround(1.0 / kBetaGrid));
    double best_t = b.t0, best_v = -1;
    for (int j = 0; j <= n; ++j) {
      const double t = b.t0 + D * j / n;
      const double v = beta_eval(t, b);
      if (v > best_v) best_v = v, best_t = t;
    }
    argmax_bad += std::abs(best_t - tc) > kBetaGrid * D;

    BetaParams s = b;
    s.q = s.p;
    const double sc = 0.5 * (s.t0 + s.t1);
    for (double f : {0.05, 0.2, 0.37, 0.49}) {
      const double l = beta_eval(sc - f * D, s), r = beta_eval(sc + f * D, s);
      const double e = std::abs(l - r) / s.k;
      worst_sym = std::max(worst_sym, e);
      sym_bad += e > kBetaSymTol;
    }
  }
  return {peak_bad + outside_bad + argmax_bad + sym_bad == 0,
          fmt("%d draws; peak err max %.2e, nonzero outside %d, argmax off %d, symmetry err max %.2e", kBetaDraws,
              worst_peak, outside_bad, argmax_bad, worst_sym)};
}

// ---------------------------------------------------------------------------

TrajectoryGraph random_graph(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<> u(-10, 10);
  TrajectoryGraph g;
  g.nodes.resize(2, n);
  for (int i = 0; i < n; ++i) g.nodes.col(i) = Point(u(rng), u(rng));
  return g;
}

// Every map from the smaller node set into the larger one; the cheapest map
// (first found on ties) defines the association.
double brute_force_distance(const TrajectoryGraph& g1, const TrajectoryGraph& g2) {
  const bool first_small = g1.size() <= g2.size();
  const auto& a = first_small ? g1.nodes : g2.nodes;
  const auto& b = first_small ? g2.nodes : g1.nodes;
  const long n = a.cols(), m = b.cols();
  std::vector<long> map(static_cast<std::size_t>(n), 0), best_map;
  double best_sum = std::numeric_limits<double>::infinity();
  while (true) {
    double sum = 0;
    for (long i = 0; i < n; ++i) {
      const double dx = a(0, i) - b(0, map[i]), dy = a(1, i) - b(1, map[i]);
      sum += std::sqrt(dx * dx + dy * dy);
    }
    if (sum < best_sum) best_sum = sum, best_map = map;
    long i = 0;
    while (i < n && ++map[i] == m) map[i++] = 0;
    if (i == n) break;
  }
  double worst = 0;
  for (long i = 0; i < n; ++i) {
    const double dx = a(0, i) - b(0, best_map[i]), dy = a(1, i) - b(1, best_map[i]);
    worst = std::max(worst, std::sqrt(dx * dx + dy * dy));
  }
  return best_sum / static_cast<double>(n) + worst * static_cast<double>(std::labs(g1.size() - g2.size()));
}

Outcome matcher_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> nd(1, kMatcherMaxNodes);
  double worst = 0;
  for (int i = 0; i < kMatcherPairs; ++i) {
    const auto g1 = random_graph(rng, nd(rng)), g2 = random_graph(rng, nd(rng));
    const double ref = brute_force_distance(g1, g2);
    worst = std::max({worst, std::abs(graph_distance(g1, g2).value - ref) / std::max(1.0, ref),
                      std::abs(graph_distance(normalize(g1), normalize(g2)).value -
                               brute_force_distance(normalize(g1), normalize(g2)))});
  }
  int self_bad = 0;
  for (int i = 0; i < kSelfGraphs; ++i) {
    const auto g = random_graph(rng, nd(rng));
    self_bad += graph_distance(g, g).value != 0.0 || graph_distance(normalize(g), normalize(g)).value != 0.0;
  }
  return {worst <= kMatcherTol && self_bad == 0,
          fmt("%d pairs, max deviation %.2e; self-distance nonzero %d/%d", kMatcherPairs, worst, self_bad, kSelfGraphs)};
}

// ---------------------------------------------------------------------------

Outcome skeleton_glyphs() {
  int ok = 0;
  std::string bad;
  const auto set = testing::glyphs();
  for (const auto& g : set) {
    const auto graph = testing::glyph_graph(g.trace);
    int kinds[4] = {}, types[3] = {};
    for (const auto& n : graph.nodes) ++kinds[static_cast<int>(n.kind)];
    for (const auto& e : graph.edges) ++types[static_cast<int>(e.type)];
    const bool match = kinds[0] == g.ends && kinds[1] == g.branches && kinds[2] == g.crosses &&
                       kinds[3] == g.anchors && types[0] == g.type1 && types[1] == g.type2 && types[2] == g.type0;
    ok += match;
    if (!match) bad += std::string(" ") + g.name;
  }
  return {ok == static_cast<int>(set.size()),
          fmt("%d/%zu glyphs exact%s%s", ok, set.size(), bad.empty() ? "" : "; wrong:", bad.c_str())};
}

// ---------------------------------------------------------------------------

// Pixel order of a simple open skeleton path walked from the End pixel
// nearest `start`. Empty if the skeleton is not a single open chain.
std::vector<PixelPos> walk_chain(const BinaryImage& sk, const Point& start) {
  auto neighbours = [&](PixelPos p) {
    std::vector<PixelPos> out;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if ((dx || dy) && sk.at(p.x + dx, p.y + dy)) out.push_back({p.x + dx, p.y + dy});
    return out;
  };
  const auto pix = sk.pixels();
  std::vector<PixelPos> ends;
  for (auto p : pix) {
    const auto n = neighbours(p).size();
    if (n == 1) ends.push_back(p);
    else if (n != 2) return {};
  }
  if (ends.size() != 2) return {};
  const auto dist = [&](PixelPos p) { return (Point(p.x, p.y) - start).norm(); };
  std::vector<PixelPos> walk{dist(ends[0]) <= dist(ends[1]) ? ends[0] : ends[1]};
  std::set<PixelPos> seen{walk[0]};
  while (true) {
    std::vector<PixelPos> next;
    for (auto q : neighbours(walk.back()))
      if (!seen.count(q)) next.push_back(q);
    if (next.size() != 1) break;
    walk.push_back(next[0]);
    seen.insert(next[0]);
  }
  return walk.size() == pix.size() ? walk : std::vector<PixelPos>{};
}

Outcome recovery() {
  PipelineConfig cfg;
  SynthConfig sc = cfg.synth;
  sc.noise_sigma = 0.0;
  int aligned = 0;
  double worst = 0;
  for (int i = 0; i < kRoundTripWords; ++i) {
    const auto m = random_word_model(3 + i % 6, derive_seed(derive_seed(cfg.seed, 4), i));
    const auto gt = gen_word(m, sc, 0);
    const auto r = rasterize(gt.trajectory, sc);
    const auto truth = to_pixel_frame(gt.trajectory, r.origin);
    const double e = dtw_mean_error(recover_trace(r.image, cfg.recovery).points, truth.points);
    worst = std::max(worst, e);
    aligned += e <= sc.stroke_width;
  }
  int exact = 0, rightmost = 0;
  for (int i = 0; i < kChainWords; ++i) {
    const auto m = random_chain_model(3 + i % 4, derive_seed(derive_seed(cfg.seed, 5), i));
    const auto gt = gen_word(m, sc, 0);
    const auto r = rasterize(gt.trajectory, sc);
    const auto truth = to_pixel_frame(gt.trajectory, r.origin);
    const auto sk = prune_spurs(skeletonize(remove_diacritics(denoise(r.image))), cfg.recovery.spur_length).image;
    const auto walk = walk_chain(sk, truth.points.front());
    const auto tr = recover_trace(r.image, cfg.recovery);
    bool same = !walk.empty() && tr.stroke_count() == 1 && tr.points.size() == walk.size();
    for (std::size_t k = 0; same && k < walk.size(); ++k) same = tr.points[k] == Point(walk[k].x, walk[k].y);
    exact += same;
    int max_x = -1;
    for (const auto& p : sk.pixels()) max_x = std::max(max_x, p.x);
    rightmost += !walk.empty() && walk.front().x == max_x;
  }
  const double share = static_cast<double>(aligned) / kRoundTripWords;
  return {share >= kRoundTripShare && exact == kChainWords,
          fmt("DTW error <= stroke width on %d/%d words (worst %.2f px); exact chain order %d/%d (true start is "
              "rightmost %d/%d)",
              aligned, kRoundTripWords, worst, exact, kChainWords, rightmost, kChainWords)};
}

// ---------------------------------------------------------------------------

// Largest relative parameter error; t0 and t1 are relative to the duration.
double param_error(const BetaParams& f, const BetaParams& t) {
  const double D = t.t1 - t.t0;
  return std::max({std::abs(f.t0 - t.t0) / D, std::abs(f.t1 - t.t1) / D, std::abs(f.p - t.p) / t.p,
                   std::abs(f.q - t.q) / t.q, std::abs(f.k - t.k) / t.k});
}

VelocityProfile profile(const BetaParams& b, double dt, int n, std::mt19937_64* rng, double sigma) {
  VelocityProfile vp;
  vp.dt = dt;
  std::normal_distribution<> noise(0, sigma);
  for (int j = 0; j < n; ++j) vp.v.push_back(beta_eval(j * dt, b) + (rng ? noise(*rng) : 0.0));
  vp.point_of.resize(vp.v.size());
  std::iota(vp.point_of.begin(), vp.point_of.end(), 0L);
  return vp;
}

BetaFit fit_or_best(const VelocityProfile& vp, std::size_t last) {
  try {
    return fit_beta(vp, {0, last});
  } catch (const FitFailure& f) {
    return f.best;
  }
}

Outcome fit() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<> td(5, 20), pd(1.5, 6), kd(0.5, 5);
  double exact_worst = 0;
  for (int i = 0; i < kFitExactDraws; ++i) {
    BetaParams b;
    b.t0 = 0;
    b.t1 = td(rng);
    b.p = pd(rng);
    b.q = pd(rng);
    b.k = kd(rng);
    exact_worst = std::max(exact_worst, param_error(fit_or_best(profile(b, b.t1 / 500, 501, nullptr, 0), 500).params, b));
  }

  BetaParams nb;
  nb.t0 = 0, nb.t1 = 10, nb.p = 2, nb.q = 2, nb.k = 3;
  double noise_worst = 0;
  for (int s = 0; s < kFitNoiseSeeds; ++s) {
    std::mt19937_64 r(static_cast<std::uint64_t>(s));
    noise_worst = std::max(noise_worst, param_error(fit_or_best(profile(nb, 0.02, 501, &r, kFitNoiseSigma), 500).params, nb));
  }

  // Noise-free generator traces on their own sampling clock.
  std::vector<BetaEllipticModel> corpus;
  for (const auto& [label, m] : vocabulary()) corpus.push_back(m);
  for (int i = 0; i < kSnrRandomWords; ++i) corpus.push_back(random_word_model(3 + i % 6, derive_seed(derive_seed(1, 6), i)));
  std::vector<double> snr(corpus.size());
  const SynthConfig sc;
  parallel_for(corpus.size(), jobs(), [&](std::size_t i) {
    const auto gt = gen_word(corpus[i], sc, 0);
    ResampledTrace rs;
    static_cast<OrderedTrace&>(rs) = gt.trajectory;
    snr[i] = fit_model(rs, estimate_velocity(rs, sample_step(corpus[i]))).snr;
  });
  std::sort(snr.begin(), snr.end());
  return {exact_worst <= kFitExactTol && noise_worst <= kFitNoiseTol && snr.front() >= kSnrMin,
          fmt("exact max rel err %.2e; noisy max rel err %.2f%% over %d seeds; SNR min %.1f dB median %.1f dB over "
              "%zu words",
              exact_worst, 100 * noise_worst, kFitNoiseSeeds, snr.front(), snr[snr.size() / 2], snr.size())};
}

// ---------------------------------------------------------------------------

Outcome recognition() {
  PipelineConfig cfg;
  load_config(HWR_DATA_DIR "/recognition.conf", cfg);
  const auto store = make_store(build_templates(cfg, jobs()));
  const auto labels = corpus_labels(cfg);
  const std::size_t per = static_cast<std::size_t>(cfg.synth.n_instances);
  std::vector<int> correct(labels.size() * per, 0), failed(labels.size() * per, 0);
  parallel_for(correct.size(), jobs(), [&](std::size_t k) {
    const std::size_t l = k / per, i = k % per;
    const auto w = render_word(labels[l].second, cfg, instance_seed(cfg, l, i), cfg.synth.noise_sigma, labels[l].first);
    try {
      correct[k] = classify(analyze_word(w.image, cfg).graph, store, cfg.match).label == labels[l].first;
    } catch (const Error&) {
      failed[k] = 1;
    }
  });
  const int ok = std::accumulate(correct.begin(), correct.end(), 0);
  const int fails = std::accumulate(failed.begin(), failed.end(), 0);
  const double acc = static_cast<double>(ok) / static_cast<double>(correct.size());
  return {acc >= kRecognitionMin,
          fmt("%d/%zu correct (%.1f%%), %d pipeline failures; %zu labels, %d templates per label, seed %llu", ok,
              correct.size(), 100 * acc, fails, labels.size(), cfg.templates_per_label,
              static_cast<unsigned long long>(cfg.seed))};
}

// ---------------------------------------------------------------------------

Outcome envelope() {
  PipelineConfig cfg;
  int done = 0, skipped = 0, iou_ok = 0, count_ok = 0, fields = 0, fields_ok = 0, failures = 0;
  for (std::size_t i = 0; done < kEnvelopes; ++i) {
    const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, 3), i);
    EnvelopeSample env;
    try {
      env = gen_envelope(envelope_words(cfg, seed, i), cfg.synth, seed);
    } catch (const LayoutError&) {
      ++skipped;
      continue;
    }
    ++done;
    Box address;
    std::size_t lines = 0, words = 0;
    std::vector<LayoutRegion> truth_fields;
    for (const auto& r : env.truth.layout) {
      if (r.kind == "address") address = r.box;
      if (r.kind == "line") ++lines;
      if (r.kind == "word" || r.kind == "code" || r.kind == "city") ++words;
      if (r.kind == "code" || r.kind == "city") truth_fields.push_back(r);
    }
    fields += static_cast<int>(truth_fields.size());
    EnvelopeLayout layout;
    try {
      layout = analyze_envelope(env.image, cfg.layout);
    } catch (const Error&) {
      ++failures;
      continue;
    }
    iou_ok += iou(address, layout.address.region) >= kEnvelopeIou;
    std::size_t found_words = 0;
    for (const auto& l : layout.address.lines) found_words += l.words.size();
    count_ok += layout.address.lines.size() == lines && found_words == words;
    for (const auto& t : truth_fields) {
      double best = 0;
      std::string kind;
      for (const auto& [box, k] : layout.fields)
        if (const double q = iou(box, t.box); q > best) best = q, kind = to_string(k);
      fields_ok += best > kFieldMatchIou && kind == t.kind;
    }
  }
  const double s_iou = static_cast<double>(iou_ok) / done, s_count = static_cast<double>(count_ok) / done,
               s_field = static_cast<double>(fields_ok) / fields;
  return {s_iou >= kEnvelopeIouShare && s_count >= kEnvelopeCountShare && s_field >= kEnvelopeFieldShare,
          fmt("%d envelopes (%d generator seeds skipped, %d analysis failures): IoU >= %.1f on %.0f%%, exact "
              "line/word counts %.0f%%, fields %d/%d (%.1f%%)",
              done, skipped, failures, kEnvelopeIou, 100 * s_iou, 100 * s_count, fields_ok, fields, 100 * s_field)};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Runs every CLI command inside `dir` with relative paths.
bool run_all_commands(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string conf = fs::absolute(HWR_DATA_DIR "/determinism.conf").string();
  const std::string cli = std::string(HWR_CLI) + " -v 0 --config " + conf;
  const std::vector<std::string> cmds = {
      "synth --envelopes 2",
      "preprocess --layout envelopes",
      "recover --svg corpus",
      "fit .",
      "match --store store corpus",
      "evaluate --corpus corpus --store store",
      "plot corpus",
  };
  for (const auto& c : cmds) {
    const std::string line = "cd '" + dir.string() + "' && " + cli + " --out . " + c + " > /dev/null 2>&1";
    if (std::system(line.c_str()) != 0) {
      std::fprintf(stderr, "command failed: %s\n", line.c_str());
      return false;
    }
  }
  return true;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "hwr_determinism";
  if (!run_all_commands(root / "a") || !run_all_commands(root / "b")) return {false, "a CLI command failed"};
  std::set<fs::path> files_a, files_b;
  for (const auto& e : fs::recursive_directory_iterator(root / "a"))
    if (e.is_regular_file()) files_a.insert(fs::relative(e.path(), root / "a"));
  for (const auto& e : fs::recursive_directory_iterator(root / "b"))
    if (e.is_regular_file()) files_b.insert(fs::relative(e.path(), root / "b"));
  int differ = 0;
  std::string first;
  for (const auto& f : files_a)
    if (!files_b.count(f) || slurp(root / "a" / f) != slurp(root / "b" / f)) {
      if (!differ) first = f.string();
      ++differ;
    }
  const bool same_set = files_a == files_b;
  fs::remove_all(root);
  return {same_set && differ == 0 && !files_a.empty(),
          fmt("%zu files from 7 commands, %d differ%s%s%s", files_a.size(), differ, same_set ? "" : ", file sets differ",
              first.empty() ? "" : ", first: ", first.c_str())};
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"beta_law", 5, beta_law},
      {"matcher_oracle", 5, matcher_oracle},
      {"skeleton_glyphs", 2, skeleton_glyphs},
      {"recovery", 60, recovery},
      {"fit", 120, fit},
      {"recognition", 300, recognition},
      {"envelope", 120, envelope},
      {"determinism", 0, determinism},
  };
  std::string only;
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--only" && i + 1 < argc) only = argv[++i];

  int failed = 0, ran = 0;
  for (const auto& c : all) {
    if (!only.empty() && only != c.name) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s <= 0 || secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %s: %s; %.1f s%s\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                c.budget_s > 0 ? fmt(" (budget %.0f s)", c.budget_s).c_str() : "");
    std::fflush(stdout);
  }
  if (!ran) {
    std::fprintf(stderr, "unknown criterion: %s\n", only.c_str());
    return 2;
  }
  return failed ? 1 : 0;
}
