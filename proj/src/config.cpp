#include "hwr/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "hwr/format.hpp"

namespace hwr {

namespace {

struct Binding {
  ConfigKey key;
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <class T>
T parse_int(std::string_view key, std::string_view s) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError(std::string(key) + ": not an integer: " + std::string(s));
  return v;
}

double parse_real(std::string_view key, std::string_view s) {
  try {
    return parse_double(s);
  } catch (const std::invalid_argument&) {
    throw ConfigError(std::string(key) + ": not a number: " + std::string(s));
  }
}

bool parse_bool(std::string_view key, std::string_view s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(std::string(key) + ": expected true or false: " + std::string(s));
}

#define HWR_INT(name, field, doc)                                                                  \
  Binding {                                                                                         \
    {name, doc}, [](PipelineConfig& c, std::string_view v) { c.field = parse_int<decltype(c.field)>(name, v); }, \
        [](const PipelineConfig& c) { return std::to_string(c.field); }                             \
  }
#define HWR_REAL(name, field, doc)                                                                 \
  Binding {                                                                                         \
    {name, doc}, [](PipelineConfig& c, std::string_view v) { c.field = parse_real(name, v); },       \
        [](const PipelineConfig& c) { return format_double(c.field); }                              \
  }
#define HWR_BOOL(name, field, doc)                                                                 \
  Binding {                                                                                         \
    {name, doc}, [](PipelineConfig& c, std::string_view v) { c.field = parse_bool(name, v); },       \
        [](const PipelineConfig& c) { return std::string(c.field ? "true" : "false"); }             \
  }

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> b = {
      HWR_INT("seed", seed, "base seed of every generated item"),
      HWR_INT("verbosity", verbosity, "0 quiet, 1 summary, 2 per item"),
      Binding{{"out", "output directory"},
              [](PipelineConfig& c, std::string_view v) { c.out = std::string(v); },
              [](const PipelineConfig& c) { return c.out.generic_string(); }},
      HWR_INT("imaging.threshold", threshold, "gray level <= threshold is ink; -1 selects Otsu"),
      HWR_REAL("imaging.diacritic_ratio", recovery.diacritic_ratio,
               "components below this fraction of the largest area are diacritics"),
      HWR_INT("recovery.spur_length", recovery.spur_length, "skeleton spurs up to this length are pruned"),
      HWR_INT("recovery.direction_window", recovery.order.direction_window,
              "pixels used for junction directions"),
      HWR_REAL("resample.lambda", resample.lambda, "curvature gain of the sampling density"),
      HWR_REAL("resample.base_step", resample.base_step, "arc length per sample at density 1"),
      HWR_REAL("resample.end_boost", resample.end_boost, "extra density at stroke ends"),
      HWR_REAL("resample.end_length", resample.end_length, "decay length of the end boost, px"),
      HWR_INT("resample.smooth_window", resample.smooth_window, "smoothing before curvature"),
      HWR_REAL("resample.curvature_span", resample.curvature_span, "arc span of the curvature estimate"),
      HWR_INT("segment.smooth_window", fit.segment.smooth_window, "velocity smoothing before minima search"),
      HWR_REAL("segment.min_prominence", fit.segment.min_prominence, "minimum dip between strokes"),
      HWR_INT("fit.max_iter", fit.beta.lm.max_iter, "Levenberg-Marquardt iteration cap"),
      HWR_REAL("fit.tol", fit.beta.lm.tol, "relative cost decrease for convergence"),
      HWR_BOOL("fit.pin_k", fit.beta.pin_k, "hold the Beta amplitude at 1"),
      HWR_BOOL("fit.joint_refine", fit.joint_refine, "refine overlapping strokes jointly"),
      Binding{{"match.midpoints", "arc (fitted arcs) or span (raw trace)"},
              [](PipelineConfig& c, std::string_view v) {
                if (v == "arc")
                  c.match.midpoints = MidpointSource::Arc;
                else if (v == "span")
                  c.match.midpoints = MidpointSource::Span;
                else
                  throw ConfigError("match.midpoints: expected arc or span: " + std::string(v));
              },
              [](const PipelineConfig& c) {
                return std::string(c.match.midpoints == MidpointSource::Arc ? "arc" : "span");
              }},
      HWR_BOOL("match.symmetric", match.symmetric, "average both association directions"),
      HWR_INT("synth.stroke_width", synth.stroke_width, "pen width, px"),
      HWR_REAL("synth.resolution", synth.resolution, "raster resolution, ppi"),
      HWR_REAL("synth.noise_sigma", synth.noise_sigma, "trajectory jitter of corpus instances, px"),
      HWR_INT("synth.labels", synth.n_templates, "vocabulary labels in the corpus (1-20)"),
      HWR_INT("synth.instances", synth.n_instances, "instances per label"),
      HWR_INT("synth.templates_per_label", templates_per_label, "store templates per label (1 clean + noisy)"),
      HWR_REAL("synth.template_noise_sigma", template_noise_sigma, "jitter of the noisy templates, px"),
      HWR_INT("layout.border_max", layout.border_max, "max frame thickness, px"),
      HWR_REAL("layout.margin_band", layout.margin_band, "frame search band, fraction of the side"),
      HWR_REAL("layout.border_min_length", layout.border_min_length, "min frame run, fraction of the side"),
      HWR_REAL("layout.density_max", layout.density_max, "stamp density threshold"),
      HWR_REAL("layout.top_band", layout.top_band, "stamps lie above this fraction of the height"),
      HWR_INT("layout.stamp_min_side", layout.stamp_min_side, "min stamp side, px"),
      HWR_REAL("layout.address_search", layout.address_search, "address searched in this lower fraction"),
      HWR_REAL("layout.cluster_gap", layout.cluster_gap, "component join distance, x median height"),
      HWR_REAL("layout.line_gap", layout.line_gap, "line split gap, x median band height"),
      HWR_REAL("layout.word_gap", layout.word_gap, "word split gap, x median component height"),
      HWR_INT("layout.code_min_components", layout.code_min_components, "postal code component range"),
      HWR_INT("layout.code_max_components", layout.code_max_components, "postal code component range"),
      HWR_REAL("layout.width_cv_max", layout.width_cv_max, "max width variation of code digits"),
      HWR_REAL("layout.ecc_split", layout.ecc_split, "max mean eccentricity of code digits"),
  };
  return b;
}

#undef HWR_INT
#undef HWR_REAL
#undef HWR_BOOL

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

} // namespace

PipelineConfig::PipelineConfig() { synth.noise_sigma = 0.5; }

void PipelineConfig::set(std::string_view key, std::string_view value) {
  for (const auto& b : bindings())
    if (key == b.key.name) {
      b.set(*this, value);
      return;
    }
  throw ConfigError("unknown config key: " + std::string(key));
}

void PipelineConfig::validate() const {
  require(verbosity >= 0 && verbosity <= 2, "verbosity must be in [0, 2]");
  require(threshold >= -1 && threshold <= 255, "imaging.threshold must be in [-1, 255]");
  require(recovery.diacritic_ratio >= 0.0 && recovery.diacritic_ratio < 1.0,
          "imaging.diacritic_ratio must be in [0, 1)");
  require(recovery.spur_length >= 0, "recovery.spur_length must be >= 0");
  require(recovery.order.direction_window >= 1, "recovery.direction_window must be >= 1");
  require(resample.lambda >= 0.0, "resample.lambda must be >= 0");
  require(resample.base_step > 0.0, "resample.base_step must be > 0");
  require(resample.end_boost >= 0.0, "resample.end_boost must be >= 0");
  require(resample.end_length > 0.0, "resample.end_length must be > 0");
  require(resample.smooth_window >= 1, "resample.smooth_window must be >= 1");
  require(resample.curvature_span > 0.0, "resample.curvature_span must be > 0");
  require(fit.segment.smooth_window >= 1, "segment.smooth_window must be >= 1");
  require(fit.segment.min_prominence >= 0.0 && fit.segment.min_prominence < 1.0,
          "segment.min_prominence must be in [0, 1)");
  require(fit.beta.lm.max_iter >= 1, "fit.max_iter must be >= 1");
  require(fit.beta.lm.tol > 0.0, "fit.tol must be > 0");
  require(synth.n_templates >= 1 && synth.n_templates <= 20, "synth.labels must be in [1, 20]");
  synth.validate();
  require(templates_per_label >= 1, "synth.templates_per_label must be >= 1");
  require(template_noise_sigma >= 0.0, "synth.template_noise_sigma must be >= 0");
  require(layout.border_max >= 1, "layout.border_max must be >= 1");
  require(layout.margin_band > 0.0 && layout.margin_band <= 0.5, "layout.margin_band must be in (0, 0.5]");
  require(layout.border_min_length > 0.0 && layout.border_min_length <= 1.0,
          "layout.border_min_length must be in (0, 1]");
  require(layout.density_max > 0.0 && layout.density_max <= 1.0, "layout.density_max must be in (0, 1]");
  require(layout.top_band > 0.0 && layout.top_band <= 1.0, "layout.top_band must be in (0, 1]");
  require(layout.stamp_min_side >= 1, "layout.stamp_min_side must be >= 1");
  require(layout.address_search > 0.0 && layout.address_search <= 1.0,
          "layout.address_search must be in (0, 1]");
  require(layout.cluster_gap > 0.0, "layout.cluster_gap must be > 0");
  require(layout.line_gap > 0.0, "layout.line_gap must be > 0");
  require(layout.word_gap > 0.0, "layout.word_gap must be > 0");
  require(layout.code_min_components >= 1 && layout.code_min_components <= layout.code_max_components,
          "layout.code_min_components must be in [1, code_max_components]");
  require(layout.width_cv_max >= 0.0, "layout.width_cv_max must be >= 0");
  require(layout.ecc_split >= 1.0, "layout.ecc_split must be >= 1");
}

std::string PipelineConfig::canonical() const {
  std::string s;
  for (const auto& b : bindings()) {
    // Output location and logging do not change results.
    if (std::string_view(b.key.name) == "out" || std::string_view(b.key.name) == "verbosity") continue;
    s += b.key.name;
    s += " = ";
    s += b.get(*this);
    s += '\n';
  }
  return s;
}

std::uint64_t PipelineConfig::hash() const { return fnv1a64(canonical()); }

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& b : bindings()) k.push_back(b.key);
    return k;
  }();
  return keys;
}

void parse_config(std::istream& in, PipelineConfig& cfg) {
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void load_config(const std::filesystem::path& path, PipelineConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  parse_config(in, cfg);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string repro_header(const PipelineConfig& cfg) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# hwr %s config %016llx seed %llu", kVersion,
                static_cast<unsigned long long>(cfg.hash()), static_cast<unsigned long long>(cfg.seed));
  return buf;
}

} // namespace hwr
