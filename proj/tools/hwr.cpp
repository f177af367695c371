// hwr: command-line driver for the recognition pipeline.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "hwr/config.hpp"
#include "hwr/envelope_layout.hpp"
#include "hwr/imaging.hpp"
#include "hwr/model_io.hpp"
#include "hwr/pipeline.hpp"
#include "hwr/plots.hpp"

namespace fs = std::filesystem;
using namespace hwr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitItemFailures = 1;
constexpr int kExitInvalid = 2;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out;
  std::optional<int> verbosity;
  std::vector<std::string> sets;
};

class Clock {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Context {
  PipelineConfig cfg;
  int jobs = 1;

  void info(const std::string& msg) const {
    if (cfg.verbosity >= 1) std::cerr << msg << '\n';
  }
  void detail(const std::string& msg) const {
    if (cfg.verbosity >= 2) std::cerr << msg << '\n';
  }
  void warn(const std::string& msg) const { std::cerr << "warning: " << msg << '\n'; }

  fs::path out_path(const fs::path& rel) const { return cfg.out / rel; }

  std::ofstream open(const fs::path& rel) const {
    const fs::path p = out_path(rel);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    return f;
  }

  /// Header line, canonical config and the command line inputs.
  void write_run_record(const std::string& command, const std::vector<fs::path>& inputs) const {
    auto f = open("run_" + command + ".txt");
    f << repro_header(cfg) << '\n' << "# command " << command << '\n';
    for (const auto& in : inputs) f << "# input " << in.generic_string() << '\n';
    f << cfg.canonical();
  }
};

Context make_context(const GlobalOptions& g) {
  Context ctx;
  if (!g.config.empty()) load_config(g.config, ctx.cfg);
  for (const auto& kv : g.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value: " + kv);
    ctx.cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) ctx.cfg.seed = *g.seed;
  if (!g.out.empty()) ctx.cfg.out = g.out;
  if (g.verbosity) ctx.cfg.verbosity = *g.verbosity;
  ctx.cfg.validate();
  if (g.jobs < 1) throw ConfigError("--jobs must be >= 1");
  ctx.jobs = g.jobs;
  return ctx;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// File name without the matched suffix.
std::string item_name(const fs::path& p) {
  const std::string name = p.filename().string();
  for (const char* ext : {".model.json", ".trace", ".pgm", ".pbm"})
    if (has_suffix(name, ext)) return name.substr(0, name.size() - std::char_traits<char>::length(ext));
  return p.stem().string();
}

/// Files given directly plus files under given directories whose names end
/// with one of `exts`, sorted by path. Directory scans pick one kind of file
/// per item; explicit files may be of any supported kind.
std::vector<fs::path> collect_inputs(const std::vector<std::string>& inputs, const std::vector<std::string>& exts) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (!e.is_regular_file()) continue;
        const std::string name = e.path().filename().string();
        if (std::any_of(exts.begin(), exts.end(), [&](const std::string& x) { return has_suffix(name, x); }))
          files.push_back(e.path());
      }
    } else if (fs::is_regular_file(p)) {
      files.push_back(p);
    } else {
      throw InvalidInput("no such input: " + in);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidInput("no input files");
  for (std::size_t i = 1; i < files.size(); ++i)
    if (item_name(files[i]) == item_name(files[i - 1]))
      throw InvalidInput("duplicate item name " + item_name(files[i]));
  return files;
}

BinaryImage load_ink(const fs::path& p, const PipelineConfig& cfg) {
  if (has_suffix(p.filename().string(), ".pbm")) return read_pbm(p);
  return preprocess(read_pgm(p), cfg);
}

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

struct ItemResult {
  bool ok = true;
  std::string line;
  std::vector<std::string> warnings;
};

/// Runs `fn` over the inputs on the worker pool; per-item errors are caught
/// and reported in input order.
template <class Fn>
std::vector<ItemResult> run_items(const Context& ctx, const std::vector<fs::path>& files, Fn&& fn) {
  std::vector<ItemResult> res(files.size());
  parallel_for(files.size(), ctx.jobs, [&](std::size_t i) {
    try {
      res[i] = fn(files[i]);
    } catch (const std::exception& e) {
      res[i].ok = false;
      res[i].line = item_name(files[i]) + " error " + e.what();
    }
  });
  std::size_t warnings = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    warnings += res[i].warnings.size();
    if (ctx.cfg.verbosity >= 2)
      for (const auto& w : res[i].warnings) ctx.warn(item_name(files[i]) + ": " + w);
    if (!res[i].ok) std::cerr << "error: " << res[i].line << '\n';
    ctx.detail(res[i].line);
  }
  if (warnings && ctx.cfg.verbosity < 2)
    ctx.info(std::to_string(warnings) + " warnings (shown with --verbosity 2)");
  return res;
}

int exit_for(const std::vector<ItemResult>& res) {
  return std::all_of(res.begin(), res.end(), [](const ItemResult& r) { return r.ok; }) ? kExitOk
                                                                                         : kExitItemFailures;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const Context& ctx, bool with_store, int envelopes) {
  const auto& cfg = ctx.cfg;
  const auto labels = corpus_labels(cfg);
  const std::size_t per = static_cast<std::size_t>(cfg.synth.n_instances);
  Clock clock;

  std::vector<std::string> manifest(labels.size() * per);
  parallel_for(manifest.size(), ctx.jobs, [&](std::size_t i) {
    const std::size_t l = i / per, k = i % per;
    const std::string& label = labels[l].first;
    const std::uint64_t seed = instance_seed(cfg, l, k);
    const auto w = render_word(labels[l].second, cfg, seed, cfg.synth.noise_sigma, label);
    char name[64];
    std::snprintf(name, sizeof name, "%s_%03zu", label.c_str(), k);
    const fs::path base = ctx.out_path(fs::path("corpus") / label / name);
    fs::create_directories(base.parent_path());
    write_pgm(to_gray(w.image), base.string() + ".pgm");
    write_trace(w.truth.trajectory, base.string() + ".trace");
    write_model_json(w.truth.model, base.string() + ".model.json");
    manifest[i] = label + "/" + name + ".pgm\t" + label + "\t" + std::to_string(seed);
  });
  {
    auto f = ctx.open("corpus/truth.manifest");
    f << repro_header(cfg) << '\n';
    for (const auto& m : manifest) f << m << '\n';
  }
  ctx.info("corpus: " + std::to_string(manifest.size()) + " instances in " + fmt(clock.seconds(), 3) + " s");

  if (with_store) {
    Clock sc;
    save_store(ctx.out_path("store"), build_templates(cfg, ctx.jobs));
    ctx.info("store: " + std::to_string(labels.size() * static_cast<std::size_t>(cfg.templates_per_label)) +
             " templates in " + fmt(sc.seconds(), 3) + " s");
  }

  int failures = 0;
  if (envelopes > 0) {
    std::vector<std::string> errors(static_cast<std::size_t>(envelopes));
    parallel_for(errors.size(), ctx.jobs, [&](std::size_t i) {
      const std::uint64_t seed = derive_seed(derive_seed(cfg.seed, 3), i);
      char name[64];
      std::snprintf(name, sizeof name, "envelope_%03zu", i);
      try {
        const auto env = gen_envelope(envelope_words(cfg, seed, i), cfg.synth, seed);
        const fs::path base = ctx.out_path(fs::path("envelopes") / name);
        fs::create_directories(base.parent_path());
        write_pgm(to_gray(env.image), base.string() + ".pgm");
        std::ofstream f(base.string() + ".truth", std::ios::binary);
        f << repro_header(cfg) << '\n';
        for (const auto& r : env.truth.layout)
          f << r.kind << ' ' << r.box.x0 << ' ' << r.box.y0 << ' ' << r.box.x1 << ' ' << r.box.y1 << '\n';
      } catch (const LayoutError& e) {
        errors[i] = std::string(name) + ": " + e.what();
      }
    });
    for (const auto& e : errors)
      if (!e.empty()) {
        std::cerr << "error: " << e << '\n';
        ++failures;
      }
  }
  ctx.write_run_record("synth", {});
  return failures ? kExitItemFailures : kExitOk;
}

// ---------------------------------------------------------------- preprocess

int cmd_preprocess(const Context& ctx, const std::vector<std::string>& inputs, bool layout) {
  const auto files = collect_inputs(inputs, {".pgm", ".pbm"});
  const auto res = run_items(ctx, files, [&](const fs::path& p) {
    ItemResult r;
    const std::string name = item_name(p);
    const BinaryImage ink = load_ink(p, ctx.cfg);
    write_pbm(ink, ctx.out_path(name + ".pbm"));
    r.line = name + " ink " + std::to_string(ink.count());
    if (layout) {
      const EnvelopeLayout lay = analyze_envelope(ink, ctx.cfg.layout);
      std::ofstream rep(ctx.out_path(name + ".layout.txt"), std::ios::binary);
      rep << repro_header(ctx.cfg) << '\n';
      write_layout_report(lay, rep);
      std::ofstream svg(ctx.out_path(name + ".layout.svg"), std::ios::binary);
      write_layout_svg(ink, lay, svg);
      std::size_t words = 0;
      for (const auto& l : lay.address.lines) words += l.words.size();
      r.line += " lines " + std::to_string(lay.address.lines.size()) + " words " + std::to_string(words);
    }
    return r;
  });
  ctx.write_run_record("preprocess", files);
  return exit_for(res);
}

// ---------------------------------------------------------------- recover

int cmd_recover(const Context& ctx, const std::vector<std::string>& inputs, bool svg) {
  const auto files = collect_inputs(inputs, {".pgm", ".pbm"});
  const auto res = run_items(ctx, files, [&](const fs::path& p) {
    ItemResult r;
    const std::string name = item_name(p);
    const BinaryImage ink = load_ink(p, ctx.cfg);
    const OrderedTrace tr = recover_trace(ink, ctx.cfg.recovery);
    if (tr.empty()) r.warnings.push_back("blank image, empty trace written");
    write_trace(tr, ctx.out_path(name + ".trace"));
    if (svg) {
      std::ofstream f(ctx.out_path(name + ".trace.svg"), std::ios::binary);
      plot_trace(tr, &ink, f);
    }
    r.line = name + " points " + std::to_string(tr.points.size()) + " strokes " + std::to_string(tr.stroke_count());
    return r;
  });
  {
    auto f = ctx.open("recover.txt");
    f << repro_header(ctx.cfg) << '\n';
    for (const auto& r : res) f << r.line << '\n';
  }
  ctx.write_run_record("recover", files);
  return exit_for(res);
}

// ---------------------------------------------------------------- fit

OrderedTrace load_trace_or_image(const fs::path& p, const PipelineConfig& cfg) {
  const std::string name = p.filename().string();
  if (has_suffix(name, ".trace")) return read_trace(p);
  return recover_trace(load_ink(p, cfg), cfg.recovery);
}

int cmd_fit(const Context& ctx, const std::vector<std::string>& inputs) {
  const auto files = collect_inputs(inputs, {".trace"});
  std::vector<double> snr(files.size(), std::nan(""));
  const auto res = run_items(ctx, files, [&](const fs::path& p) {
    ItemResult r;
    const std::string name = item_name(p);
    const OrderedTrace tr = load_trace_or_image(p, ctx.cfg);
    if (tr.empty()) {
      r.warnings.push_back("empty trace skipped");
      r.line = name + " skipped";
      return r;
    }
    WordAnalysis a = analyze_trace(tr, ctx.cfg);
    r.warnings = a.warnings;
    write_model_json(a.fit.model, ctx.out_path(name + ".model.json"));
    std::ofstream f(ctx.out_path(name + ".velocity.svg"), std::ios::binary);
    plot_velocity(a.velocity, a.fit.model, f);
    const std::size_t i = static_cast<std::size_t>(&p - files.data());
    snr[i] = a.fit.snr;
    r.line = name + " strokes " + std::to_string(a.fit.model.strokes.size()) + " rms " + fmt(a.fit.rms) + " snr_db " +
             fmt(a.fit.snr) + " beta_failures " + std::to_string(a.fit.beta_failures);
    return r;
  });
  std::vector<double> s;
  for (double v : snr)
    if (!std::isnan(v)) s.push_back(v);
  std::sort(s.begin(), s.end());
  {
    auto f = ctx.open("fit.txt");
    f << repro_header(ctx.cfg) << '\n';
    for (const auto& r : res) f << r.line << '\n';
    if (!s.empty()) {
      const auto q = [&](double f) { return s[static_cast<std::size_t>(f * static_cast<double>(s.size() - 1))]; };
      f << "# snr_db n " << s.size() << " min " << fmt(s.front()) << " p10 " << fmt(q(0.1)) << " median "
        << fmt(q(0.5)) << " max " << fmt(s.back()) << '\n';
    }
  }
  ctx.write_run_record("fit", files);
  return exit_for(res);
}

// ---------------------------------------------------------------- match / evaluate

struct Sample {
  fs::path path;
  std::string truth = "-";
};

struct MatchOutcome {
  bool recovered = false, fitted = false, classified = false;
  Classification result;
  std::string error;
};

MatchOutcome match_one(const fs::path& p, const TemplateStore& store, const PipelineConfig& cfg, double* t_recover,
                       double* t_fit, double* t_match) {
  MatchOutcome m;
  try {
    Clock c0;
    const OrderedTrace tr = load_trace_or_image(p, cfg);
    *t_recover = c0.seconds();
    if (tr.empty()) throw InvalidInput("empty trace");
    m.recovered = true;
    Clock c1;
    const WordAnalysis a = analyze_trace(tr, cfg);
    *t_fit = c1.seconds();
    m.fitted = true;
    Clock c2;
    m.result = classify(a.graph, store, cfg.match);
    *t_match = c2.seconds();
    m.classified = true;
  } catch (const std::exception& e) {
    m.error = e.what();
  }
  return m;
}

std::string report_line(const std::string& id, const MatchOutcome& m, const std::string& truth) {
  if (!m.classified) return id + " - " + truth + " - - # " + m.error;
  return id + ' ' + m.result.label + ' ' + truth + ' ' + fmt(m.result.distance.value, 9) + ' ' +
         fmt(m.result.margin, 9);
}

int cmd_match(const Context& ctx, const std::vector<std::string>& inputs, const std::string& store_dir) {
  const TemplateStore store = load_store(store_dir, ctx.cfg.match.midpoints);
  if (store.empty()) throw ConfigError("empty template store " + store_dir);
  const auto files = collect_inputs(inputs, {".pgm", ".pbm"});
  std::vector<MatchOutcome> out(files.size());
  parallel_for(files.size(), ctx.jobs, [&](std::size_t i) {
    double a, b, c;
    out[i] = match_one(files[i], store, ctx.cfg, &a, &b, &c);
  });
  auto f = ctx.open("match.txt");
  f << repro_header(ctx.cfg) << '\n' << "# sample_id predicted truth distance margin\n";
  bool failed = false;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string line = report_line(item_name(files[i]), out[i], "-");
    f << line << '\n';
    if (!out[i].classified) {
      failed = true;
      std::cerr << "error: " << item_name(files[i]) << ": " << out[i].error << '\n';
    }
    ctx.detail(line);
  }
  ctx.write_run_record("match", files);
  return failed ? kExitItemFailures : kExitOk;
}

std::vector<Sample> read_truth(const fs::path& corpus) {
  std::ifstream in(corpus / "truth.manifest");
  if (!in) throw InvalidInput("missing truth manifest in " + corpus.string());
  std::vector<Sample> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string rel, label;
    if (!std::getline(ls, rel, '\t') || !std::getline(ls, label, '\t'))
      throw InvalidInput("malformed truth manifest line: " + line);
    samples.push_back({corpus / rel, label});
  }
  if (samples.empty()) throw InvalidInput("empty corpus " + corpus.string());
  return samples;
}

int cmd_evaluate(const Context& ctx, const std::string& corpus, const std::string& store_dir) {
  const auto samples = read_truth(corpus);
  const TemplateStore store = load_store(store_dir, ctx.cfg.match.midpoints);
  if (store.empty()) throw ConfigError("empty template store " + store_dir);

  Clock total;
  std::vector<MatchOutcome> out(samples.size());
  std::vector<std::array<double, 3>> timing(samples.size(), {0, 0, 0});
  parallel_for(samples.size(), ctx.jobs, [&](std::size_t i) {
    out[i] = match_one(samples[i].path, store, ctx.cfg, &timing[i][0], &timing[i][1], &timing[i][2]);
  });

  std::size_t recovered = 0, fitted = 0, classified = 0, correct = 0;
  std::map<std::pair<std::string, std::string>, int> confusions;
  auto f = ctx.open("eval.txt");
  f << repro_header(ctx.cfg) << '\n' << "# sample_id predicted truth distance margin\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& m = out[i];
    recovered += m.recovered;
    fitted += m.fitted;
    classified += m.classified;
    if (m.classified && m.result.label == samples[i].truth)
      ++correct;
    else
      ++confusions[{samples[i].truth, m.classified ? m.result.label : "-"}];
    f << report_line(item_name(samples[i].path), m, samples[i].truth) << '\n';
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  f << "# samples " << samples.size() << " recovered " << recovered << " fitted " << fitted << " classified "
    << classified << '\n'
    << "# accuracy " << fmt(accuracy) << " (" << correct << "/" << samples.size() << ")\n";
  for (const auto& [k, n] : confusions) f << "# confusion " << k.first << " -> " << k.second << ' ' << n << '\n';

  nlohmann::ordered_json j;
  j["version"] = kVersion;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(ctx.cfg.hash()));
  j["config_hash"] = hash;
  j["seed"] = ctx.cfg.seed;
  j["samples"] = samples.size();
  j["recovered"] = recovered;
  j["fitted"] = fitted;
  j["classified"] = classified;
  j["correct"] = correct;
  j["accuracy"] = accuracy;
  j["confusions"] = nlohmann::ordered_json::array();
  for (const auto& [k, n] : confusions)
    j["confusions"].push_back({{"truth", k.first}, {"predicted", k.second}, {"count", n}});
  ctx.open("eval.json") << j.dump(2) << '\n';

  // Timings vary between runs, so they only go to the console.
  double tr = 0, tf = 0, tm = 0;
  for (const auto& t : timing) {
    tr += t[0];
    tf += t[1];
    tm += t[2];
  }
  ctx.info("accuracy " + fmt(accuracy) + " (" + std::to_string(correct) + "/" + std::to_string(samples.size()) + ")");
  ctx.info("time recover " + fmt(tr, 3) + " s, fit " + fmt(tf, 3) + " s, match " + fmt(tm, 3) + " s, wall " +
           fmt(total.seconds(), 3) + " s");
  std::vector<fs::path> in = {corpus, store_dir};
  ctx.write_run_record("evaluate", in);
  return classified == samples.size() ? kExitOk : kExitItemFailures;
}

// ---------------------------------------------------------------- plot

int cmd_plot(const Context& ctx, const std::vector<std::string>& inputs) {
  const auto files = collect_inputs(inputs, {".pgm", ".pbm"});
  const auto res = run_items(ctx, files, [&](const fs::path& p) {
    ItemResult r;
    const std::string name = item_name(p);
    const std::string file = p.filename().string();
    auto svg = [&](const std::string& suffix) {
      std::ofstream f(ctx.out_path(name + suffix), std::ios::binary);
      if (!f) throw Error("cannot write " + name + suffix);
      return f;
    };
    if (has_suffix(file, ".model.json")) {
      const auto model = read_model_json(p);
      auto f = svg(".model.svg");
      plot_model(model, f);
      const Reconstruction rec = reconstruct(model, 512);
      VelocityProfile vp;
      vp.v = rec.velocity;
      vp.dt = rec.t.size() > 1 ? rec.t[1] - rec.t[0] : 1.0;
      auto g = svg(".velocity.svg");
      plot_velocity(vp, model, g);
      r.line = name + " model";
    } else if (has_suffix(file, ".trace")) {
      const OrderedTrace tr = read_trace(p);
      auto f = svg(".trace.svg");
      plot_trace(tr, nullptr, f);
      if (!tr.empty()) {
        const WordAnalysis a = analyze_trace(tr, ctx.cfg);
        auto g = svg(".velocity.svg");
        plot_velocity(a.velocity, a.fit.model, g);
        auto h = svg(".model.svg");
        plot_model(a.fit.model, h);
      }
      r.line = name + " trace";
    } else {
      const BinaryImage ink = load_ink(p, ctx.cfg);
      const BinaryImage clean =
          remove_diacritics(denoise(ink), DiacriticOptions{ctx.cfg.recovery.diacritic_ratio});
      const Skeleton sk = prune_spurs(skeletonize(clean), ctx.cfg.recovery.spur_length);
      const SegmentGraph g = build_segment_graph(sk);
      auto f = svg(".skeleton.svg");
      plot_skeleton(clean, g, f);
      const OrderedTrace tr = order_segments(g, ctx.cfg.recovery.order);
      auto t = svg(".trace.svg");
      plot_trace(tr, &clean, t);
      r.line = name + " image nodes " + std::to_string(g.nodes.size()) + " segments " + std::to_string(g.edges.size());
    }
    return r;
  });
  ctx.write_run_record("plot", files);
  return exit_for(res);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline handwriting recovery, Beta-elliptic modelling and graph-matching recognition"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "base seed (overrides the config)");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output directory (overrides the config)");
  app.add_option("-v,--verbosity", g.verbosity, "0 quiet, 1 summary, 2 per item")->check(CLI::Range(0, 2));
  app.add_option("--set", g.sets, "override one config key, key=value")->take_all();

  bool list_keys = false;
  auto* config_cmd = app.add_subcommand("config", "print the effective config");
  config_cmd->add_flag("--keys", list_keys, "list documented keys instead");

  bool no_store = false;
  int envelopes = 0;
  auto* synth = app.add_subcommand("synth", "generate the word corpus, template store and envelopes");
  synth->add_flag("--no-store", no_store, "skip the template store");
  synth->add_option("--envelopes", envelopes, "number of synthetic envelopes")->check(CLI::NonNegativeNumber);

  std::vector<std::string> inputs;
  bool layout = false, svg = false;
  auto* pre = app.add_subcommand("preprocess", "binarize and denoise images; optional envelope layout");
  pre->add_option("inputs", inputs, "images or directories")->required();
  pre->add_flag("--layout", layout, "analyse envelope layout (report + SVG)");

  auto* rec = app.add_subcommand("recover", "recover pen order from word images");
  rec->add_option("inputs", inputs, "images or directories")->required();
  rec->add_flag("--svg", svg, "write SVG overlays");

  auto* fit = app.add_subcommand("fit", "fit Beta-elliptic models to traces");
  fit->add_option("inputs", inputs, "trace files, images or directories")->required();

  std::string store, corpus;
  auto* match = app.add_subcommand("match", "classify words against a template store");
  match->add_option("inputs", inputs, "images, traces or directories")->required();
  match->add_option("--store", store, "template store directory")->required();

  auto* eval = app.add_subcommand("evaluate", "recognition accuracy over a corpus");
  eval->add_option("--corpus", corpus, "corpus directory with truth.manifest")->required();
  eval->add_option("--store", store, "template store directory")->required();

  auto* plot = app.add_subcommand("plot", "SVG of images, traces or models");
  plot->add_option("inputs", inputs, "files or directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    Context ctx = make_context(g);
    if (*config_cmd) {
      if (list_keys)
        for (const auto& k : config_keys()) std::cout << k.name << "  " << k.doc << '\n';
      else
        std::cout << repro_header(ctx.cfg) << '\n' << ctx.cfg.canonical();
      return kExitOk;
    }
    fs::create_directories(ctx.cfg.out);
    ctx.info(repro_header(ctx.cfg));
    if (*synth) return cmd_synth(ctx, !no_store, envelopes);
    if (*pre) return cmd_preprocess(ctx, inputs, layout);
    if (*rec) return cmd_recover(ctx, inputs, svg);
    if (*fit) return cmd_fit(ctx, inputs);
    if (*match) return cmd_match(ctx, inputs, store);
    if (*eval) return cmd_evaluate(ctx, corpus, store);
    if (*plot) return cmd_plot(ctx, inputs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const NotFound& e) {
    std::cerr << "not found: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitItemFailures;
  }
  return kExitInvalid;
}
