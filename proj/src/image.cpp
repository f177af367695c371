#include "hwr/image.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <fstream>
#include <istream>
#include <ostream>

namespace hwr {

void Box::extend(int x, int y) {
  if (empty()) {
    x0 = x1 = x;
    y0 = y1 = y;
    return;
  }
  x0 = std::min(x0, x);
  y0 = std::min(y0, y);
  x1 = std::max(x1, x);
  y1 = std::max(y1, y);
}

void Box::extend(const Box& o) {
  if (o.empty()) return;
  extend(o.x0, o.y0);
  extend(o.x1, o.y1);
}

Box Box::intersect(const Box& o) const {
  return Box{std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
}

double iou(const Box& a, const Box& b) {
  const Box i = a.intersect(b);
  const double inter = static_cast<double>(i.area());
  const double uni = static_cast<double>(a.area() + b.area()) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

GrayImage::GrayImage(int width, int height, std::uint8_t fill, double ppi)
    : width_(width), height_(height), ppi_(ppi) {
  if (width <= 0 || height <= 0) throw InvalidInput("GrayImage: dimensions must be positive");
  samples_.assign(static_cast<std::size_t>(width) * height, fill);
}

BinaryImage::BinaryImage(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw InvalidInput("BinaryImage: dimensions must be positive");
  mask_.assign(static_cast<std::size_t>(width) * height, 0);
}

std::size_t BinaryImage::count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

std::vector<PixelPos> BinaryImage::pixels() const {
  std::vector<PixelPos> out;
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if ((*this)(x, y)) out.push_back({x, y});
  return out;
}

Box BinaryImage::bounds() const {
  Box b;
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if ((*this)(x, y)) b.extend(x, y);
  return b;
}

BinaryImage BinaryImage::crop(const Box& box) const {
  const Box c = box.intersect(Box{0, 0, width_ - 1, height_ - 1});
  if (c.empty()) throw InvalidInput("crop: empty region");
  BinaryImage out(c.width(), c.height());
  for (int y = c.y0; y <= c.y1; ++y)
    for (int x = c.x0; x <= c.x1; ++x)
      if ((*this)(x, y)) out.set(x - c.x0, y - c.y0);
  return out;
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
int read_header_int(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == EOF) throw InvalidInput("netpbm: truncated header");
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v = 0;
  if (!(in >> v)) throw InvalidInput("netpbm: bad header value");
  return v;
}

std::string read_magic(std::istream& in) {
  char m[2] = {0, 0};
  in.read(m, 2);
  if (!in) throw InvalidInput("netpbm: missing magic");
  return std::string(m, 2);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

} // namespace

GrayImage read_pgm(std::istream& in) {
  const std::string magic = read_magic(in);
  if (magic != "P5") throw InvalidInput("read_pgm: expected P5, got " + magic);
  const int w = read_header_int(in);
  const int h = read_header_int(in);
  const int maxval = read_header_int(in);
  if (w <= 0 || h <= 0) throw InvalidInput("read_pgm: empty image");
  if (maxval <= 0 || maxval > 255) throw InvalidInput("read_pgm: only 8-bit maxval supported");
  in.get(); // single whitespace after maxval
  GrayImage img(w, h);
  std::vector<char> row(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    in.read(row.data(), w);
    if (!in) throw InvalidInput("read_pgm: truncated raster");
    for (int x = 0; x < w; ++x) {
      const int v = static_cast<unsigned char>(row[x]);
      img(x, y) = static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval);
    }
  }
  return img;
}

void write_pgm(const GrayImage& img, std::ostream& out) {
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.samples().data()),
            static_cast<std::streamsize>(img.samples().size()));
}

BinaryImage read_pbm(std::istream& in) {
  const std::string magic = read_magic(in);
  if (magic != "P4") throw InvalidInput("read_pbm: expected P4, got " + magic);
  const int w = read_header_int(in);
  const int h = read_header_int(in);
  if (w <= 0 || h <= 0) throw InvalidInput("read_pbm: empty image");
  in.get();
  BinaryImage img(w, h);
  const int stride = (w + 7) / 8;
  std::vector<char> row(static_cast<std::size_t>(stride));
  for (int y = 0; y < h; ++y) {
    in.read(row.data(), stride);
    if (!in) throw InvalidInput("read_pbm: truncated raster");
    for (int x = 0; x < w; ++x)
      if (static_cast<unsigned char>(row[x / 8]) & (0x80u >> (x % 8))) img.set(x, y);
  }
  return img;
}

void write_pbm(const BinaryImage& img, std::ostream& out) {
  out << "P4\n" << img.width() << ' ' << img.height() << '\n';
  const int stride = (img.width() + 7) / 8;
  std::vector<char> row(static_cast<std::size_t>(stride));
  for (int y = 0; y < img.height(); ++y) {
    std::fill(row.begin(), row.end(), 0);
    for (int x = 0; x < img.width(); ++x)
      if (img(x, y)) row[x / 8] = static_cast<char>(static_cast<unsigned char>(row[x / 8]) | (0x80u >> (x % 8)));
    out.write(row.data(), stride);
  }
}

GrayImage read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_pgm(in);
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_pgm(img, out);
}

BinaryImage read_pbm(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_pbm(in);
}

void write_pbm(const BinaryImage& img, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_pbm(img, out);
}

GrayImage to_gray(const BinaryImage& img) {
  GrayImage g(img.width(), img.height(), 255);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      if (img(x, y)) g(x, y) = 0;
  return g;
}

} // namespace hwr
