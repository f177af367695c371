#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hwr/beta_elliptic.hpp"
#include "hwr/envelope_layout.hpp"
#include "hwr/matcher.hpp"
#include "hwr/synth.hpp"
#include "hwr/trajectory.hpp"

namespace hwr {

inline constexpr const char* kVersion = "0.3.0";

/// Every tunable of the pipeline. Text form is flat `key = value` lines;
/// `#` starts a comment. See `config_keys()` for the documented keys.
struct PipelineConfig {
  std::uint64_t seed = 1;
  int verbosity = 1;
  std::filesystem::path out = "out";

  int threshold = -1; ///< binarization threshold, -1 = Otsu
  RecoveryOptions recovery;
  ResampleOptions resample;
  ModelFitOptions fit;
  MatchOptions match;
  LayoutOptions layout;

  SynthConfig synth;
  int templates_per_label = 100;
  double template_noise_sigma = 0.5;

  PipelineConfig();

  /// Assigns one key; ConfigError on unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  /// ConfigError when a value is outside its documented range.
  void validate() const;
  /// Every key but `out` and `verbosity` in documented order, one
  /// `key = value` line each.
  std::string canonical() const;
  /// FNV-1a 64 over canonical().
  std::uint64_t hash() const;
};

struct ConfigKey {
  const char* name;
  const char* doc;
};
const std::vector<ConfigKey>& config_keys();

/// Applies the lines of a config file on top of `cfg`.
void parse_config(std::istream& in, PipelineConfig& cfg);
void load_config(const std::filesystem::path& path, PipelineConfig& cfg);

std::uint64_t fnv1a64(std::string_view s);

/// `# hwr <version> config <hash hex> seed <seed>`
std::string repro_header(const PipelineConfig& cfg);

} // namespace hwr
