#include "hwr/pipeline.hpp"

#include <cstdio>

#include "hwr/imaging.hpp"

namespace hwr {

BinaryImage preprocess(const GrayImage& img, const PipelineConfig& cfg) {
  const BinarizeMethod method = cfg.threshold < 0 ? BinarizeMethod{binarization::Otsu{}}
                                                  : BinarizeMethod{binarization::Fixed{cfg.threshold}};
  return denoise(binarize(img, method));
}

WordAnalysis analyze_trace(const OrderedTrace& trace, const PipelineConfig& cfg) {
  if (trace.empty()) throw InvalidInput("analyze_trace: empty trace");
  WordAnalysis a;
  a.trace = trace;
  a.resampled = resample(trace, cfg.resample, &a.warnings);
  if (a.resampled.empty()) throw InvalidInput("analyze_trace: no stroke survives resampling");
  a.velocity = estimate_velocity(a.resampled);
  a.fit = fit_model(a.resampled, a.velocity, cfg.fit);
  a.warnings.insert(a.warnings.end(), a.fit.warnings.begin(), a.fit.warnings.end());
  a.graph = cfg.match.midpoints == MidpointSource::Arc ? graph_from_model(a.fit.model)
                                                       : graph_from_spans(a.resampled, a.fit.spans);
  return a;
}

WordAnalysis analyze_word(const BinaryImage& word, const PipelineConfig& cfg) {
  return analyze_trace(recover_trace(word, cfg.recovery), cfg);
}

std::vector<std::pair<std::string, BetaEllipticModel>> corpus_labels(const PipelineConfig& cfg) {
  auto voc = vocabulary();
  voc.resize(std::min<std::size_t>(voc.size(), static_cast<std::size_t>(cfg.synth.n_templates)));
  return voc;
}

namespace {
constexpr std::uint64_t kStride = 100000;
}

std::uint64_t instance_seed(const PipelineConfig& cfg, std::size_t label, std::size_t index) {
  return derive_seed(derive_seed(cfg.seed, 1), label * kStride + index);
}

std::uint64_t template_seed(const PipelineConfig& cfg, std::size_t label, std::size_t index) {
  return derive_seed(derive_seed(cfg.seed, 2), label * kStride + index);
}

BetaEllipticModel translate_model(BetaEllipticModel m, const Point& origin) {
  for (auto& s : m.strokes) s.ellipse.center -= origin;
  return m;
}

RenderedWord render_word(const BetaEllipticModel& model, const PipelineConfig& cfg, std::uint64_t seed,
                         double noise_sigma, const std::string& label) {
  SynthConfig sc = cfg.synth;
  sc.noise_sigma = noise_sigma;
  GroundTruth gt = gen_word(model, sc, seed, label);
  RasterWord r = rasterize(gt.trajectory, sc);
  RenderedWord out;
  out.truth.trajectory = to_pixel_frame(gt.trajectory, r.origin);
  out.truth.model = translate_model(gt.model, r.origin);
  out.truth.label = label;
  out.image = std::move(r.image);
  return out;
}

std::map<std::string, std::vector<StoredTemplate>> build_templates(const PipelineConfig& cfg, int jobs) {
  const auto labels = corpus_labels(cfg);
  const std::size_t per = static_cast<std::size_t>(cfg.templates_per_label);
  std::vector<StoredTemplate> flat(labels.size() * per);
  parallel_for(flat.size(), jobs, [&](std::size_t i) {
    const std::size_t l = i / per, j = i % per;
    const double sigma = j == 0 ? 0.0 : cfg.template_noise_sigma;
    const auto w = render_word(labels[l].second, cfg, template_seed(cfg, l, j), sigma, labels[l].first);
    auto a = analyze_word(w.image, cfg);
    char name[32];
    std::snprintf(name, sizeof name, "t%03zu", j);
    flat[i] = StoredTemplate{name, std::move(a.fit.model), std::move(a.graph)};
  });
  std::map<std::string, std::vector<StoredTemplate>> out;
  for (std::size_t i = 0; i < flat.size(); ++i) out[labels[i / per].first].push_back(std::move(flat[i]));
  return out;
}

TemplateStore make_store(const std::map<std::string, std::vector<StoredTemplate>>& templates) {
  TemplateStore store;
  for (const auto& [label, list] : templates)
    for (const auto& t : list) store.add(label, t.graph, label + "/" + t.name);
  return store;
}

std::vector<GroundTruth> envelope_words(const PipelineConfig& cfg, std::uint64_t seed, std::size_t index) {
  const auto voc = vocabulary();
  std::mt19937_64 rng(splitmix64(seed));
  const std::size_t n = 2 + index % 4;
  SynthConfig sc = cfg.synth;
  sc.noise_sigma = 0.0;
  std::vector<GroundTruth> words;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& [label, model] = voc[rng() % voc.size()];
    words.push_back(gen_word(model, sc, 0, label));
  }
  return words;
}

} // namespace hwr
