#pragma once

#include <Eigen/Core>
#include <variant>
#include <vector>

#include "hwr/image.hpp"

namespace hwr {

/// Thin trace produced by skeletonize(). Holds its image by value.
struct Skeleton {
  BinaryImage image;
};

struct ConnectedComponent {
  std::vector<PixelPos> pixels;
  Box bbox;
  long area = 0;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  /// Ratio of principal-axis standard deviations, >= 1.
  double eccentricity = 1.0;
};

namespace binarization {
struct Fixed {
  int threshold = 128;
};
struct Otsu {};
} // namespace binarization
using BinarizeMethod = std::variant<binarization::Fixed, binarization::Otsu>;

/// Ink is every sample <= threshold.
BinaryImage binarize(const GrayImage& img, const BinarizeMethod& method);

/// Otsu threshold: the first t maximizing between-class variance of
/// [0..t] vs [t+1..255]. Single-valued histograms fall back to 127.
int otsu_threshold(const GrayImage& img);

/// Removes pixels with no 8-neighbours and fills background pixels whose four
/// 4-neighbours are all ink. Idempotent.
BinaryImage denoise(const BinaryImage& img);

/// Zhang-Suen two-subiteration thinning where each candidate is re-checked
/// as a simple point before removal, followed by staircase removal. Preserves
/// component and hole counts.
Skeleton skeletonize(const BinaryImage& img);

/// 8-connected foreground components, sorted by bbox.x0 descending (then y0).
std::vector<ConnectedComponent> connected_components(const BinaryImage& img);

/// Number of 4-connected background regions not touching the border.
int hole_count(const BinaryImage& img);
/// Components minus holes under (8, 4) connectivity.
int euler_number(const BinaryImage& img);

/// True if the pixel can be removed without changing the topology
/// (8-connected foreground, 4-connected background).
bool is_simple_point(const BinaryImage& img, int x, int y);

/// True if some 2x2 block is fully foreground.
bool has_full_2x2_block(const BinaryImage& img);

struct DiacriticOptions {
  double small_ratio = 0.15;
};

/// Drops components that are small relative to the largest one and lie
/// entirely above or below its vertical band.
BinaryImage remove_diacritics(const BinaryImage& img, const DiacriticOptions& opts = {});

} // namespace hwr
