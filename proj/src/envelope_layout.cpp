#include "hwr/envelope_layout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "hwr/imaging.hpp"
#include "hwr/svg.hpp"

namespace hwr {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// Runs of non-zero entries [begin, end] in a profile, split only at zero
// runs of at least min_gap entries.
std::vector<std::pair<int, int>> split_profile(const std::vector<int>& profile, int min_gap) {
  std::vector<std::pair<int, int>> runs;
  const int n = static_cast<int>(profile.size());
  int i = 0;
  while (i < n) {
    if (profile[i] == 0) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && profile[j + 1] != 0) ++j;
    runs.emplace_back(i, j);
    i = j + 1;
  }
  std::vector<std::pair<int, int>> merged;
  for (const auto& r : runs) {
    if (!merged.empty() && r.first - merged.back().second - 1 < min_gap)
      merged.back().second = r.second;
    else
      merged.push_back(r);
  }
  return merged;
}

Box ink_bounds(const BinaryImage& img, const Box& area) {
  Box b;
  const Box a = area.intersect({0, 0, img.width() - 1, img.height() - 1});
  for (int y = a.y0; y <= a.y1; ++y)
    for (int x = a.x0; x <= a.x1; ++x)
      if (img(x, y)) b.extend(x, y);
  return b;
}

} // namespace

const char* to_string(FieldKind k) { return k == FieldKind::PostalCode ? "code" : "city"; }

BinaryImage suppress_border(const BinaryImage& img, const LayoutOptions& opts, BinaryImage* removed) {
  BinaryImage out = img;
  BinaryImage gone(img.width(), img.height());
  const int w = img.width(), h = img.height();

  // Rows (horizontal=true) or columns holding a long run inside a margin band;
  // groups of such lines no thicker than border_max are frame lines.
  auto scan = [&](bool horizontal) {
    const int lines = horizontal ? h : w;
    const int length = horizontal ? w : h;
    const int band = static_cast<int>(std::ceil(opts.margin_band * lines));
    const int min_run = static_cast<int>(std::ceil(opts.border_min_length * length));
    auto at = [&](int line, int k) { return horizontal ? img(k, line) : img(line, k); };
    std::vector<std::vector<std::pair<int, int>>> runs(static_cast<std::size_t>(lines));
    std::vector<std::uint8_t> hit(static_cast<std::size_t>(lines), 0);
    for (int l = 0; l < lines; ++l) {
      if (l >= band && l < lines - band) continue;
      int k = 0;
      while (k < length) {
        if (!at(l, k)) {
          ++k;
          continue;
        }
        const int s = k;
        while (k < length && at(l, k)) ++k;
        if (k - s >= min_run) runs[l].emplace_back(s, k - 1);
      }
      hit[l] = !runs[l].empty();
    }
    int l = 0;
    while (l < lines) {
      if (!hit[l]) {
        ++l;
        continue;
      }
      int e = l;
      while (e + 1 < lines && hit[e + 1]) ++e;
      if (e - l + 1 <= opts.border_max)
        for (int q = l; q <= e; ++q)
          for (const auto& [s, t] : runs[q])
            for (int k = s; k <= t; ++k) {
              if (horizontal)
                gone.set(k, q);
              else
                gone.set(q, k);
            }
      l = e + 1;
    }
  };
  scan(true);
  scan(false);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (gone(x, y)) out.set(x, y, false);
  if (removed) *removed = std::move(gone);
  return out;
}

BinaryImage suppress_stamps(const BinaryImage& img, const LayoutOptions& opts, std::vector<Box>* removed) {
  BinaryImage out = img;
  const double limit = opts.top_band * img.height();
  for (const auto& c : connected_components(img)) {
    const double density = static_cast<double>(c.area) / static_cast<double>(c.bbox.area());
    if (density <= opts.density_max || c.centroid.y() >= limit) continue;
    if (std::min(c.bbox.width(), c.bbox.height()) < opts.stamp_min_side) continue;
    for (const auto& p : c.pixels) out.set(p.x, p.y, false);
    if (removed) removed->push_back(c.bbox);
  }
  return out;
}

Box locate_address(const BinaryImage& img, const LayoutOptions& opts) {
  const double top = (1.0 - opts.address_search) * img.height();
  std::vector<ConnectedComponent> comps;
  for (auto& c : connected_components(img))
    if (c.centroid.y() >= top) comps.push_back(std::move(c));
  if (comps.empty()) throw NotFound("locate_address: no ink in the search area");

  std::vector<double> heights;
  for (const auto& c : comps) heights.push_back(c.bbox.height());
  const double gap = opts.cluster_gap * median(heights);
  const int half = static_cast<int>(std::ceil(gap / 2.0));

  std::vector<std::size_t> parent(comps.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const Box& a = comps[i].bbox;
    const Box da{a.x0 - half, a.y0 - half, a.x1 + half, a.y1 + half};
    for (std::size_t j = i + 1; j < comps.size(); ++j) {
      const Box& b = comps[j].bbox;
      const Box db{b.x0 - half, b.y0 - half, b.x1 + half, b.y1 + half};
      if (!da.intersect(db).empty()) parent[find(i)] = find(j);
    }
  }
  std::vector<long> mass(comps.size(), 0);
  std::vector<Box> box(comps.size());
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto r = find(i);
    mass[r] += comps[i].area;
    box[r].extend(comps[i].bbox);
  }
  std::size_t best = find(0);
  for (std::size_t i = 0; i < comps.size(); ++i)
    if (mass[i] > mass[best]) best = i;
  return box[best];
}

AddressBlock segment_lines(const BinaryImage& img, const Box& region, const LayoutOptions& opts) {
  AddressBlock block;
  block.region = region;
  const Box r = region.intersect({0, 0, img.width() - 1, img.height() - 1});
  if (r.empty()) return block;
  std::vector<int> rows(static_cast<std::size_t>(r.height()), 0);
  for (int y = r.y0; y <= r.y1; ++y)
    for (int x = r.x0; x <= r.x1; ++x) rows[y - r.y0] += img(x, y);
  const auto raw = split_profile(rows, 1);
  if (raw.empty()) return block;
  std::vector<double> heights;
  for (const auto& [a, b] : raw) heights.push_back(b - a + 1);
  const int gap = std::max(1, static_cast<int>(std::ceil(opts.line_gap * median(heights))));
  for (const auto& [a, b] : split_profile(rows, gap)) {
    LineBand band;
    band.region = ink_bounds(img, {r.x0, r.y0 + a, r.x1, r.y0 + b});
    block.lines.push_back(segment_words(band, img, opts));
  }
  return block;
}

LineBand segment_words(const LineBand& band, const BinaryImage& img, const LayoutOptions& opts) {
  LineBand out;
  out.region = band.region;
  const Box r = band.region.intersect({0, 0, img.width() - 1, img.height() - 1});
  if (r.empty()) return out;
  const BinaryImage crop = img.crop(r);
  std::vector<double> heights;
  for (const auto& c : connected_components(crop)) heights.push_back(c.bbox.height());
  if (heights.empty()) return out;
  const int gap = std::max(1, static_cast<int>(std::ceil(opts.word_gap * median(heights))));
  std::vector<int> cols(static_cast<std::size_t>(r.width()), 0);
  for (int y = 0; y < crop.height(); ++y)
    for (int x = 0; x < crop.width(); ++x) cols[x] += crop(x, y);
  const auto runs = split_profile(cols, gap);
  for (auto it = runs.rbegin(); it != runs.rend(); ++it)
    out.words.push_back(ink_bounds(img, {r.x0 + it->first, r.y0, r.x0 + it->second, r.y1}));
  return out;
}

std::vector<std::pair<Box, FieldKind>> discriminate_field(const std::vector<Box>& words, const BinaryImage& img,
                                                          const LayoutOptions& opts) {
  std::vector<std::pair<Box, FieldKind>> out;
  for (const auto& w : words) {
    FieldKind kind = FieldKind::CityName;
    const Box r = w.intersect({0, 0, img.width() - 1, img.height() - 1});
    if (!r.empty()) {
      const auto comps = connected_components(img.crop(r));
      const int n = static_cast<int>(comps.size());
      if (n >= opts.code_min_components && n <= opts.code_max_components) {
        double mw = 0.0, me = 0.0;
        for (const auto& c : comps) {
          mw += c.bbox.width();
          me += c.eccentricity;
        }
        mw /= n;
        me /= n;
        double var = 0.0;
        for (const auto& c : comps) var += (c.bbox.width() - mw) * (c.bbox.width() - mw);
        const double cv = std::sqrt(var / n) / mw;
        if (cv <= opts.width_cv_max && me <= opts.ecc_split) kind = FieldKind::PostalCode;
      }
    }
    out.emplace_back(w, kind);
  }
  return out;
}

EnvelopeLayout analyze_envelope(const BinaryImage& img, const LayoutOptions& opts) {
  EnvelopeLayout out;
  BinaryImage frame;
  BinaryImage clean = suppress_border(img, opts, &frame);
  if (!frame.bounds().empty()) out.borders.push_back(frame.bounds());
  clean = suppress_stamps(clean, opts, &out.stamps);
  out.address = segment_lines(clean, locate_address(clean, opts), opts);
  const std::size_t nl = out.address.lines.size();
  for (std::size_t l = nl >= 2 ? nl - 2 : 0; l < nl; ++l) {
    const auto f = discriminate_field(out.address.lines[l].words, clean, opts);
    out.fields.insert(out.fields.end(), f.begin(), f.end());
  }
  out.cleaned = std::move(clean);
  return out;
}

void write_layout_report(const EnvelopeLayout& layout, std::ostream& out) {
  auto rec = [&](const char* kind, const Box& b) {
    out << kind << ' ' << b.x0 << ' ' << b.y0 << ' ' << b.x1 << ' ' << b.y1 << '\n';
  };
  for (const auto& b : layout.borders) rec("border", b);
  for (const auto& b : layout.stamps) rec("stamp", b);
  rec("address", layout.address.region);
  for (const auto& line : layout.address.lines) rec("line", line.region);
  for (const auto& line : layout.address.lines)
    for (const auto& w : line.words) {
      const auto it = std::find_if(layout.fields.begin(), layout.fields.end(),
                                   [&](const auto& f) { return f.first == w; });
      rec(it == layout.fields.end() ? "word" : to_string(it->second), w);
    }
}

void write_layout_svg(const BinaryImage& img, const EnvelopeLayout& layout, std::ostream& out) {
  SvgWriter svg(out, img.width(), img.height());
  svg.raster(img, "#999");
  svg.raster(layout.cleaned, "black");
  for (const auto& b : layout.borders) svg.rect(b, "orange", 2);
  for (const auto& b : layout.stamps) svg.rect(b, "purple", 2);
  svg.rect(layout.address.region, "blue", 2);
  for (const auto& line : layout.address.lines) {
    svg.rect(line.region, "green", 1);
    for (const auto& w : line.words) svg.rect(w, "#0a0", 1);
  }
  for (const auto& [b, k] : layout.fields)
    svg.text(Point(double(b.x0), double(b.y0 - 2)), to_string(k), 10, k == FieldKind::PostalCode ? "red" : "blue");
}

} // namespace hwr
