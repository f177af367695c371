#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hwr/beta_elliptic.hpp"
#include "hwr/image.hpp"

namespace hwr {

struct SynthConfig {
  std::uint64_t seed = 1;
  int stroke_width = 3;
  double resolution = 300.0;
  double noise_sigma = 0.0;
  int n_templates = 20;
  int n_instances = 25;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

struct LayoutRegion {
  Box box;
  std::string kind; ///< border, stamp, sender, address, line, word, code, city
};

struct GroundTruth {
  OrderedTrace trajectory;
  BetaEllipticModel model;
  std::string label;
  std::vector<LayoutRegion> layout;
};

std::uint64_t splitmix64(std::uint64_t x);
/// Seed for item `index` of a batch seeded with `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Samples `reconstruct` on a fixed time grid (kSamplesPerUnit per time
/// unit) and adds N(0, noise_sigma) to each coordinate when noise_sigma > 0.
GroundTruth gen_word(const BetaEllipticModel& model, const SynthConfig& cfg, std::uint64_t seed,
                     std::string label = {});
inline constexpr double kSamplesPerUnit = 100.0;

/// Time step of the grid gen_word samples a model on.
double sample_step(const BetaEllipticModel& model);

struct RasterWord {
  BinaryImage image;
  /// Model coordinates of pixel (0, 0).
  Point origin = Point::Zero();
};

/// Stamps every pixel whose centre lies within stroke_width / 2 of a
/// pen-down segment. The canvas is the trace's bounding box padded by
/// 2 * stroke_width on each side.
RasterWord rasterize(const OrderedTrace& tr, const SynthConfig& cfg);

/// Trace shifted into the pixel frame of a raster.
OrderedTrace to_pixel_frame(const OrderedTrace& tr, const Point& origin);

struct WordShape {
  double min_axis = 7.0;
  double max_axis = 15.0;
  double loop_probability = 0.15;
  double speed = 30.0; ///< mean pen speed, px per time unit
  int stroke_width = 3;
  /// Rejection sampling cap; InvalidInput when exceeded.
  int max_attempts = 2000;
};

/// Random cursive word of `strokes` elliptic strokes drawn right to left.
/// Accepted samples start at their rightmost point, keep both pen ends clear
/// of other ink and only cross themselves transversally.
BetaEllipticModel random_word_model(int strokes, std::uint64_t seed, const WordShape& shape = {});

/// Single open chain: no loops and no self-contact.
BetaEllipticModel random_chain_model(int strokes, std::uint64_t seed, const WordShape& shape = {});

/// The 20 built-in city-name labels and their models (3 to 8 strokes).
std::vector<std::pair<std::string, BetaEllipticModel>> vocabulary();

/// Compact single-component glyph for digit d (0-9), about 14 x 20 px.
BetaEllipticModel digit_model(int d);

struct EnvelopeConfig {
  int width = 1100;
  int height = 520;
  int frame_inset = 12;
  int frame_thickness = 3;
  bool frame = true;
  bool stamp = true;
  bool sender = true;
};

struct EnvelopeSample {
  BinaryImage image;
  GroundTruth truth; ///< layout holds every region; label is the city word
  /// Frame pixels, for checking border suppression.
  BinaryImage frame_mask;
};

/// Composes an envelope: frame, stamp, sender block and an address block
/// whose last line holds a 4-digit postal code and the city word (the last
/// entry of addr_words). Other words fill the lines above, right to left.
/// Throws LayoutError when a line does not fit the canvas.
EnvelopeSample gen_envelope(const std::vector<GroundTruth>& addr_words, const SynthConfig& cfg, std::uint64_t seed,
                            const EnvelopeConfig& env = {});

} // namespace hwr
