#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "hwr/error.hpp"

namespace hwr {

struct PixelPos {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelPos&, const PixelPos&) = default;
  friend auto operator<=>(const PixelPos&, const PixelPos&) = default;
};

/// Inclusive pixel box (x0, y0) .. (x1, y1).
struct Box {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  bool empty() const { return x1 < x0 || y1 < y0; }
  int width() const { return empty() ? 0 : x1 - x0 + 1; }
  int height() const { return empty() ? 0 : y1 - y0 + 1; }
  long area() const { return static_cast<long>(width()) * height(); }
  bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
  bool contains(const Box& o) const { return o.x0 >= x0 && o.x1 <= x1 && o.y0 >= y0 && o.y1 <= y1; }
  void extend(int x, int y);
  void extend(const Box& o);
  Box intersect(const Box& o) const;
  friend bool operator==(const Box&, const Box&) = default;
};

double iou(const Box& a, const Box& b);

/// 8-bit grayscale raster, row-major, top-left origin.
class GrayImage {
public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 255, double ppi = 300.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return ppi_; }
  bool empty() const { return samples_.empty(); }

  std::uint8_t operator()(int x, int y) const { return samples_[index(x, y)]; }
  std::uint8_t& operator()(int x, int y) { return samples_[index(x, y)]; }
  const std::vector<std::uint8_t>& samples() const { return samples_; }

private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  double ppi_ = 300.0;
  std::vector<std::uint8_t> samples_;
};

/// Foreground mask. Out-of-range reads through at() are background.
class BinaryImage {
public:
  BinaryImage() = default;
  BinaryImage(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return mask_.empty(); }

  bool operator()(int x, int y) const { return mask_[index(x, y)] != 0; }
  void set(int x, int y, bool v = true) { mask_[index(x, y)] = v ? 1 : 0; }
  bool at(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && mask_[index(x, y)] != 0;
  }
  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::size_t count() const;
  std::vector<PixelPos> pixels() const;
  Box bounds() const;
  /// Sub-image over box (clipped to the raster).
  BinaryImage crop(const Box& box) const;

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> mask_;
};

/// 8-neighbour offsets, counter-clockwise starting east (image y grows downward,
/// so "north" is dy = -1).
inline constexpr int kDx8[8] = {1, 1, 0, -1, -1, -1, 0, 1};
inline constexpr int kDy8[8] = {0, -1, -1, -1, 0, 1, 1, 1};

// Netpbm I/O. P5 is read as gray, P4 as binary (1 = ink).
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);
BinaryImage read_pbm(const std::filesystem::path& path);
void write_pbm(const BinaryImage& img, const std::filesystem::path& path);

GrayImage read_pgm(std::istream& in);
void write_pgm(const GrayImage& img, std::ostream& out);
BinaryImage read_pbm(std::istream& in);
void write_pbm(const BinaryImage& img, std::ostream& out);

/// Ink renders as 0, paper as 255.
GrayImage to_gray(const BinaryImage& img);

} // namespace hwr
