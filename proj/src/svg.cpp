#include "hwr/svg.hpp"

#include "hwr/format.hpp"

namespace hwr {

namespace {

std::string n(double v) { return format_double(v); }

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '&')
      out += "&amp;";
    else
      out += c;
  }
  return out;
}

} // namespace

SvgWriter::SvgWriter(std::ostream& out, double width, double height, double scale) : out_(out) {
  out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << n(width * scale) << "\" height=\"" << n(height * scale)
       << "\" viewBox=\"0 0 " << n(width) << ' ' << n(height) << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

SvgWriter::~SvgWriter() { out_ << "</svg>\n"; }

void SvgWriter::raster(const BinaryImage& img, const std::string& fill, double dx, double dy) {
  out_ << "<path fill=\"" << fill << "\" d=\"";
  for (int y = 0; y < img.height(); ++y) {
    int x = 0;
    while (x < img.width()) {
      if (!img(x, y)) {
        ++x;
        continue;
      }
      const int start = x;
      while (x < img.width() && img(x, y)) ++x;
      out_ << 'M' << n(start + dx) << ' ' << n(y + dy) << 'h' << (x - start) << "v1h" << -(x - start) << 'z';
    }
  }
  out_ << "\"/>\n";
}

void SvgWriter::rect(const Box& b, const std::string& stroke, double width) {
  out_ << "<rect x=\"" << b.x0 << "\" y=\"" << b.y0 << "\" width=\"" << b.width() << "\" height=\"" << b.height()
       << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << n(width) << "\"/>\n";
}

void SvgWriter::polyline(std::span<const Point> pts, const std::string& stroke, double width) {
  out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << n(width) << "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) out_ << (i ? " " : "") << n(pts[i].x()) << ',' << n(pts[i].y());
  out_ << "\"/>\n";
}

void SvgWriter::circle(const Point& c, double r, const std::string& fill) {
  out_ << "<circle cx=\"" << n(c.x()) << "\" cy=\"" << n(c.y()) << "\" r=\"" << n(r) << "\" fill=\"" << fill
       << "\"/>\n";
}

void SvgWriter::line(const Point& a, const Point& b, const std::string& stroke, double width) {
  out_ << "<line x1=\"" << n(a.x()) << "\" y1=\"" << n(a.y()) << "\" x2=\"" << n(b.x()) << "\" y2=\"" << n(b.y())
       << "\" stroke=\"" << stroke << "\" stroke-width=\"" << n(width) << "\"/>\n";
}

void SvgWriter::text(const Point& at, const std::string& s, double size, const std::string& fill) {
  out_ << "<text x=\"" << n(at.x()) << "\" y=\"" << n(at.y()) << "\" font-size=\"" << n(size) << "\" fill=\"" << fill
       << "\">" << escape(s) << "</text>\n";
}

} // namespace hwr
