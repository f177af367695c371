#pragma once

#include <ostream>
#include <span>
#include <string>

#include "hwr/image.hpp"
#include "hwr/trajectory.hpp"

namespace hwr {

/// Minimal SVG emitter. Coordinates are user units with y down; `scale` sets
/// the display size in px per unit.
class SvgWriter {
public:
  SvgWriter(std::ostream& out, double width, double height, double scale = 1.0);
  ~SvgWriter();
  SvgWriter(const SvgWriter&) = delete;
  SvgWriter& operator=(const SvgWriter&) = delete;

  /// Foreground pixels as one path of unit-height horizontal runs.
  void raster(const BinaryImage& img, const std::string& fill, double dx = 0, double dy = 0);
  void rect(const Box& b, const std::string& stroke, double width = 1.0);
  void polyline(std::span<const Point> pts, const std::string& stroke, double width = 1.0);
  void circle(const Point& c, double r, const std::string& fill);
  void line(const Point& a, const Point& b, const std::string& stroke, double width = 1.0);
  void text(const Point& at, const std::string& s, double size = 10.0, const std::string& fill = "black");

private:
  std::ostream& out_;
};

} // namespace hwr
