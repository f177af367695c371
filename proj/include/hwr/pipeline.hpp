#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "hwr/config.hpp"

namespace hwr {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be written
/// by index so the outcome does not depend on scheduling. The first exception
/// thrown by fn is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      (void)w;
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

/// Ink mask of a scanned word or envelope: binarization, then denoising.
BinaryImage preprocess(const GrayImage& img, const PipelineConfig& cfg);

struct WordAnalysis {
  OrderedTrace trace;
  ResampledTrace resampled;
  VelocityProfile velocity;
  ModelFit fit;
  TrajectoryGraph graph;
  std::vector<std::string> warnings;
};

/// Resampling, velocity, Beta-elliptic fit and trajectory graph of a trace.
/// InvalidInput when the trace is empty.
WordAnalysis analyze_trace(const OrderedTrace& trace, const PipelineConfig& cfg);
/// Temporal-order recovery of a word mask followed by analyze_trace.
WordAnalysis analyze_word(const BinaryImage& word, const PipelineConfig& cfg);

/// The first cfg.synth.n_templates vocabulary entries.
std::vector<std::pair<std::string, BetaEllipticModel>> corpus_labels(const PipelineConfig& cfg);

/// Seeds of test instances and of store templates come from disjoint streams.
std::uint64_t instance_seed(const PipelineConfig& cfg, std::size_t label, std::size_t index);
std::uint64_t template_seed(const PipelineConfig& cfg, std::size_t label, std::size_t index);

/// Model translated so that it lines up with a raster whose pixel (0, 0) sits
/// at `origin`.
BetaEllipticModel translate_model(BetaEllipticModel m, const Point& origin);

struct RenderedWord {
  GroundTruth truth; ///< trajectory and model in the raster's pixel frame
  BinaryImage image;
};

/// gen_word + rasterize with the given jitter.
RenderedWord render_word(const BetaEllipticModel& model, const PipelineConfig& cfg, std::uint64_t seed,
                         double noise_sigma, const std::string& label);

/// Templates of every corpus label: template 0 is a clean render, the rest
/// use template_noise_sigma. Fitting failures propagate.
std::map<std::string, std::vector<StoredTemplate>> build_templates(const PipelineConfig& cfg, int jobs);

TemplateStore make_store(const std::map<std::string, std::vector<StoredTemplate>>& templates);

/// Address words drawn from the vocabulary for envelope `index`, the city last.
std::vector<GroundTruth> envelope_words(const PipelineConfig& cfg, std::uint64_t seed, std::size_t index);

} // namespace hwr
