#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "hwr/image.hpp"

namespace hwr {

struct LayoutOptions {
  int border_max = 4;             ///< max frame thickness, px
  double margin_band = 0.08;      ///< frame search band, fraction of the side
  double border_min_length = 0.5; ///< min frame run, fraction of the side
  double density_max = 0.5;       ///< stamp density threshold
  double top_band = 0.3;          ///< stamps live above this fraction of the height
  int stamp_min_side = 20;        ///< px; smaller dense blobs are ink
  double address_search = 0.7;    ///< address searched in the lower fraction
  double cluster_gap = 2.0;       ///< x median component height
  double line_gap = 0.4;          ///< x median band height
  double word_gap = 0.5;          ///< x median component height
  int code_min_components = 3;
  int code_max_components = 6;
  double width_cv_max = 0.35;
  double ecc_split = 2.5;
};

/// Removes long thin runs (frame lines) inside the margin bands. Pixels
/// removed are also set in `removed` when given.
BinaryImage suppress_border(const BinaryImage& img, const LayoutOptions& opts = {}, BinaryImage* removed = nullptr);

/// Removes components denser than density_max whose centroid lies in the top
/// band and at least stamp_min_side on both sides. Bounding boxes of removed
/// components go to `removed`.
BinaryImage suppress_stamps(const BinaryImage& img, const LayoutOptions& opts = {},
                            std::vector<Box>* removed = nullptr);

/// Bounding box of the heaviest component cluster in the search area.
/// Throws NotFound when no ink remains there.
Box locate_address(const BinaryImage& img, const LayoutOptions& opts = {});

struct LineBand {
  Box region;
  std::vector<Box> words; ///< right to left
};

struct AddressBlock {
  Box region;
  std::vector<LineBand> lines; ///< top to bottom
};

/// Horizontal projection of the region split at blank runs of at least
/// line_gap x median band height rows.
AddressBlock segment_lines(const BinaryImage& img, const Box& region, const LayoutOptions& opts = {});

/// Vertical projection of the band split at blank runs of at least
/// word_gap x median component height columns.
LineBand segment_words(const LineBand& band, const BinaryImage& img, const LayoutOptions& opts = {});

enum class FieldKind { PostalCode, CityName };
const char* to_string(FieldKind k);

/// PostalCode when the word has code_min..code_max components of regular
/// width (cv <= width_cv_max) and mean eccentricity <= ecc_split.
std::vector<std::pair<Box, FieldKind>> discriminate_field(const std::vector<Box>& words, const BinaryImage& img,
                                                          const LayoutOptions& opts = {});

struct EnvelopeLayout {
  std::vector<Box> borders;
  std::vector<Box> stamps;
  AddressBlock address;
  /// Words of the last two lines with their field kind.
  std::vector<std::pair<Box, FieldKind>> fields;
  BinaryImage cleaned; ///< after border and stamp suppression
};

/// Border and stamp suppression, address location, line and word
/// segmentation, field discrimination on the last two lines.
EnvelopeLayout analyze_envelope(const BinaryImage& img, const LayoutOptions& opts = {});

/// "kind x0 y0 x1 y1" per region: border, stamp, address, line, word, code, city.
void write_layout_report(const EnvelopeLayout& layout, std::ostream& out);
void write_layout_svg(const BinaryImage& img, const EnvelopeLayout& layout, std::ostream& out);

} // namespace hwr
