#include "hwr/beta_elliptic.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace hwr {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pi(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a <= -kPi) a += 2 * kPi;
  return a;
}

// d ln(beta) / d(t0, ln D, ln p, ln q, ln k) for t strictly inside the support.
Eigen::Matrix<double, 5, 1> log_derivatives(double t, const BetaParams& bp) {
  const double d = bp.t1 - bp.t0;
  const double tc = inflexion_time(bp);
  const double la = std::log((t - bp.t0) / (tc - bp.t0));
  const double lb = std::log((bp.t1 - t) / (bp.t1 - tc));
  Eigen::Matrix<double, 5, 1> g;
  g(0) = -bp.p / (t - bp.t0) + bp.q / (bp.t1 - t);
  g(1) = d * (-(bp.p + bp.q) / d + bp.q / (bp.t1 - t));
  g(2) = bp.p * la;
  g(3) = bp.q * lb;
  g(4) = 1.0;
  return g;
}

BetaParams from_vector(const double* x, bool pin_k) {
  BetaParams bp;
  bp.t0 = x[0];
  bp.t1 = x[0] + std::exp(x[1]);
  bp.p = std::exp(x[2]);
  bp.q = std::exp(x[3]);
  bp.k = pin_k ? 1.0 : std::exp(x[4]);
  return bp;
}

void to_vector(const BetaParams& bp, double* x, bool pin_k) {
  x[0] = bp.t0;
  x[1] = std::log(bp.t1 - bp.t0);
  x[2] = std::log(bp.p);
  x[3] = std::log(bp.q);
  if (!pin_k) x[4] = std::log(bp.k);
}

// Sum of n Beta profiles against samples (t_i, v_i). Each stroke owns
// 5 parameters (4 with pinned k).
struct BetaSumProblem {
  std::span<const double> t;
  std::span<const double> v;
  int strokes = 1;
  bool pin_k = false;

  int stride() const { return pin_k ? 4 : 5; }

  BetaParams stroke(const Eigen::VectorXd& x, int s) const { return from_vector(x.data() + s * stride(), pin_k); }

  void residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    r.resize(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) r(i) = -v[i];
    for (int s = 0; s < strokes; ++s) {
      const BetaParams bp = stroke(x, s);
      if (!bp.valid()) {
        r.setConstant(std::numeric_limits<double>::infinity());
        return;
      }
      for (std::size_t i = 0; i < t.size(); ++i) r(i) += beta_eval(t[i], bp);
    }
  }

  void jacobian(const Eigen::VectorXd& x, Eigen::MatrixXd& j) const {
    j.setZero(static_cast<Eigen::Index>(t.size()), x.size());
    for (int s = 0; s < strokes; ++s) {
      const BetaParams bp = stroke(x, s);
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] <= bp.t0 || t[i] >= bp.t1) continue;
        const double b = beta_eval(t[i], bp);
        if (b == 0.0) continue;
        const auto g = log_derivatives(t[i], bp);
        for (int c = 0; c < stride(); ++c) {
          const double val = b * g(c);
          j(static_cast<Eigen::Index>(i), s * stride() + c) = std::isfinite(val) ? val : 0.0;
        }
      }
    }
  }
};

std::vector<double> moving_average(std::span<const double> v, int window) {
  const int n = static_cast<int>(v.size());
  const int h = std::max(window, 1) / 2;
  std::vector<double> out(v.size());
  for (int i = 0; i < n; ++i) {
    const int a = std::max(0, i - h), b = std::min(n - 1, i + h);
    double s = 0.0;
    for (int k = a; k <= b; ++k) s += v[k];
    out[i] = s / (b - a + 1);
  }
  return out;
}

// Boundaries (local minima) within one pen-down piece [first, last].
std::vector<std::size_t> piece_boundaries(std::span<const double> s, std::size_t first, std::size_t last,
                                          double min_prominence) {
  std::vector<std::size_t> cut{first};
  for (std::size_t i = first + 1; i < last; ++i)
    if (s[i] <= s[i - 1] && s[i] < s[i + 1]) cut.push_back(i);
  cut.push_back(last);

  double peak = 0.0;
  for (std::size_t i = first; i <= last; ++i) peak = std::max(peak, s[i]);
  const double floor = min_prominence * peak;

  auto interval_max = [&](std::size_t a, std::size_t b, bool& interior) {
    std::size_t arg = a;
    for (std::size_t i = a; i <= b; ++i)
      if (s[i] > s[arg]) arg = i;
    interior = arg != a && arg != b;
    return s[arg];
  };

  // Drop the weakest interior cut until every dip is prominent enough.
  while (cut.size() > 2) {
    double weakest = std::numeric_limits<double>::infinity();
    std::size_t at = 0;
    for (std::size_t c = 1; c + 1 < cut.size(); ++c) {
      bool li = false, ri = false;
      const double ml = interval_max(cut[c - 1], cut[c], li);
      const double mr = interval_max(cut[c], cut[c + 1], ri);
      double prom = std::min(ml, mr) - s[cut[c]];
      if ((c == 1 && !li) || (c + 2 == cut.size() && !ri)) prom = 0.0;
      if (prom < weakest) {
        weakest = prom;
        at = c;
      }
    }
    if (weakest >= floor && weakest > 0.0) break;
    cut.erase(cut.begin() + static_cast<std::ptrdiff_t>(at));
  }
  return cut;
}

} // namespace

double beta_integral(const BetaParams& bp) {
  if (!bp.valid()) throw InvalidInput("beta: invalid parameters");
  const double d = bp.t1 - bp.t0, p = bp.p, q = bp.q;
  const double log_b = std::lgamma(p + 1) + std::lgamma(q + 1) - std::lgamma(p + q + 2);
  const double log_norm = p * std::log((p + q) / p) + q * std::log((p + q) / q);
  return bp.k * d * std::exp(log_b + log_norm);
}

void BetaEllipticModel::validate() const {
  for (std::size_t i = 0; i < strokes.size(); ++i) {
    const auto& s = strokes[i];
    if (!s.beta.valid()) throw InvalidInput("model: stroke " + std::to_string(i) + " has invalid beta parameters");
    const auto& e = s.ellipse;
    if (!(e.a >= e.b && e.b > 0.0) || !std::isfinite(e.a) || !e.center.allFinite() || !std::isfinite(e.theta) ||
        !std::isfinite(s.arc0) || !std::isfinite(s.arc1))
      throw InvalidInput("model: stroke " + std::to_string(i) + " has invalid ellipse parameters");
    if (i > 0 && s.beta.t0 < strokes[i - 1].beta.t0)
      throw InvalidInput("model: stroke " + std::to_string(i) + " starts before its predecessor");
  }
}

std::vector<std::pair<std::size_t, std::size_t>> segment_strokes(const VelocityProfile& vp,
                                                                 const SegmentOptions& opts) {
  if (vp.v.empty()) throw InvalidInput("segment_strokes: empty velocity profile");
  const std::size_t n = vp.v.size();
  auto is_break = [&](std::size_t i) { return i < vp.point_of.size() && vp.point_of[i] < 0; };

  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < n) {
    if (is_break(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && !is_break(j + 1)) ++j;
    if (j - i + 1 < 4) {
      out.emplace_back(i, j);
    } else {
      const std::span<const double> piece(vp.v.data() + i, j - i + 1);
      const auto sm = moving_average(piece, opts.smooth_window);
      const auto cut = piece_boundaries(sm, 0, sm.size() - 1, opts.min_prominence);
      for (std::size_t c = 0; c + 1 < cut.size(); ++c) out.emplace_back(i + cut[c], i + cut[c + 1]);
    }
    i = j + 1;
  }
  return out;
}

BetaFit fit_beta(const VelocityProfile& vp, std::pair<std::size_t, std::size_t> span, const BetaFitOptions& opts) {
  if (span.first > span.second || span.second >= vp.v.size()) throw InvalidInput("fit_beta: span out of range");
  const std::size_t m = span.second - span.first + 1;
  std::vector<double> t(m), v(m);
  for (std::size_t i = 0; i < m; ++i) {
    t[i] = vp.time(span.first + i);
    v[i] = vp.v[span.first + i];
  }
  const auto arg = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  const double vmax = v[arg];

  BetaFit fit;
  fit.params.t0 = t.front() - 0.5 * vp.dt;
  fit.params.t1 = t.back() + 0.5 * vp.dt;
  fit.params.k = opts.pin_k ? 1.0 : std::max(vmax, 1e-12);
  const double ratio = std::clamp((t[arg] - fit.params.t0) / (fit.params.t1 - fit.params.t0), 0.1, 0.9);
  fit.params.p = 4.0 * ratio;
  fit.params.q = 4.0 * (1.0 - ratio);
  if (!(vmax > 0.0) || !std::isfinite(vmax)) throw FitFailure("fit_beta: profile has no bump", fit);
  if (m < 3) throw FitFailure("fit_beta: span too short", fit);

  BetaSumProblem problem{t, v, 1, opts.pin_k};
  Eigen::VectorXd x(problem.stride());
  to_vector(fit.params, x.data(), opts.pin_k);
  const LmReport rep = levenberg_marquardt(problem, x, opts.lm);
  fit.params = problem.stroke(x, 0);
  fit.rms = std::sqrt(2.0 * rep.cost / static_cast<double>(m));
  fit.iterations = rep.iterations;
  fit.converged = rep.converged;
  if (!rep.converged) throw FitFailure("fit_beta: no convergence", fit);
  return fit;
}

Eigen::Matrix<double, 5, 1> beta_cost_gradient(const BetaParams& bp, std::span<const double> t,
                                              std::span<const double> v) {
  if (t.size() != v.size()) throw InvalidInput("beta_cost_gradient: size mismatch");
  Eigen::Matrix<double, 5, 1> g = Eigen::Matrix<double, 5, 1>::Zero();
  const double d = bp.t1 - bp.t0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double b = beta_eval(t[i], bp);
    const double r = b - v[i];
    if (t[i] <= bp.t0 || t[i] >= bp.t1 || b == 0.0) continue;
    const auto l = log_derivatives(t[i], bp);
    const double dlog_dd = l(1) / d;
    g(0) += r * b * (l(0) - dlog_dd);
    g(1) += r * b * dlog_dd;
    g(2) += r * b * l(2) / bp.p;
    g(3) += r * b * l(3) / bp.q;
    g(4) += r * b / bp.k;
  }
  return g;
}

EllipseFit fit_ellipse(std::span<const Point> pts) {
  if (pts.size() < 5) throw DegenerateGeometry("fit_ellipse: need at least 5 points");
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::Matrix2Xd p(2, n);
  for (Eigen::Index i = 0; i < n; ++i) p.col(i) = pts[static_cast<std::size_t>(i)];
  const Eigen::Vector2d mean = p.rowwise().mean();
  p.colwise() -= mean;
  const Eigen::Matrix2d cov = p * p.transpose() / static_cast<double>(n);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ce(cov);
  if (ce.eigenvalues()(1) <= 0.0 || ce.eigenvalues()(0) <= 1e-12 * ce.eigenvalues()(1))
    throw DegenerateGeometry("fit_ellipse: points are collinear");
  const double scale = std::sqrt(cov.trace() / 2.0);
  p /= scale;

  Eigen::MatrixXd d1(n, 3), d2(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = p(0, i), y = p(1, i);
    d1.row(i) << x * x, x * y, y * y;
    d2.row(i) << x, y, 1.0;
  }
  const Eigen::Matrix3d s1 = d1.transpose() * d1;
  const Eigen::Matrix3d s2 = d1.transpose() * d2;
  const Eigen::Matrix3d s3 = d2.transpose() * d2;
  const Eigen::Matrix3d tm = -s3.inverse() * s2.transpose();
  const Eigen::Matrix3d m = s1 + s2 * tm;
  Eigen::Matrix3d mc;
  mc.row(0) = m.row(2) / 2.0;
  mc.row(1) = -m.row(1);
  mc.row(2) = m.row(0) / 2.0;

  const Eigen::EigenSolver<Eigen::Matrix3d> es(mc);
  int pick = -1;
  double best = 0.0;
  for (int c = 0; c < 3; ++c) {
    if (std::abs(es.eigenvalues()(c).imag()) > 1e-9 * (1.0 + std::abs(es.eigenvalues()(c).real()))) continue;
    const Eigen::Vector3d vec = es.eigenvectors().col(c).real();
    const double cond = 4.0 * vec(0) * vec(2) - vec(1) * vec(1);
    if (cond > 0.0 && (pick < 0 || cond / vec.squaredNorm() > best)) {
      pick = c;
      best = cond / vec.squaredNorm();
    }
  }
  if (pick < 0) throw DegenerateGeometry("fit_ellipse: no elliptic conic fits the points");
  const Eigen::Vector3d a1 = es.eigenvectors().col(pick).real();
  const Eigen::Vector3d a2 = tm * a1;

  double ca = a1(0), cb = a1(1), cc = a1(2), cd = a2(0), ce2 = a2(1), cf = a2(2);
  Eigen::Matrix2d lin;
  lin << 2 * ca, cb, cb, 2 * cc;
  const Eigen::Vector2d centre = lin.inverse() * Eigen::Vector2d(-cd, -ce2);
  double f0 = cf + 0.5 * (cd * centre.x() + ce2 * centre.y());
  if (f0 > 0.0) {
    ca = -ca;
    cb = -cb;
    cc = -cc;
    f0 = -f0;
  }
  Eigen::Matrix2d quad;
  quad << ca, cb / 2.0, cb / 2.0, cc;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> qe(quad);
  const double l0 = qe.eigenvalues()(0), l1 = qe.eigenvalues()(1);
  if (!(l0 > 0.0) || !(f0 < 0.0)) throw DegenerateGeometry("fit_ellipse: conic is not a real ellipse");

  EllipseFit out;
  auto& e = out.ellipse;
  e.a = std::sqrt(-f0 / l0) * scale;
  e.b = std::sqrt(-f0 / l1) * scale;
  const Eigen::Vector2d major = qe.eigenvectors().col(0);
  e.theta = std::atan2(major.y(), major.x());
  if (e.theta < 0.0) e.theta += kPi;
  if (e.theta >= kPi) e.theta -= kPi;
  e.center = centre * scale + mean;
  if (!std::isfinite(e.a) || !std::isfinite(e.b) || !e.center.allFinite())
    throw DegenerateGeometry("fit_ellipse: non-finite parameters");

  double res = 0.0;
  for (const auto& q : pts) {
    const Eigen::Vector2d f = to_ellipse_frame(Eigen::Vector2d(q), e);
    res += std::abs(f.x() * f.x() / (e.a * e.a) + f.y() * f.y() / (e.b * e.b) - 1.0);
  }
  out.residual = res / static_cast<double>(pts.size());
  return out;
}

std::pair<double, double> arc_angles(std::span<const Point> pts, const EllipseParams& ep) {
  if (pts.empty()) throw InvalidInput("arc_angles: no points");
  auto angle = [&](const Point& q) {
    const Eigen::Vector2d f = to_ellipse_frame(Eigen::Vector2d(q), ep);
    return std::atan2(f.y() / ep.b, f.x() / ep.a);
  };
  const double first = angle(pts.front());
  double cur = first, raw = first;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double next = angle(pts[i]);
    cur += wrap_pi(next - raw);
    raw = next;
  }
  return {first, cur};
}

namespace {

Stroke chord_stroke(std::span<const Point> pts, const BetaParams& beta) {
  Stroke s;
  s.beta = beta;
  const Point a = pts.front(), b = pts.back();
  const double chord = (b - a).norm();
  const double len = path_length(pts);
  if (chord < 1e-9) {
    const double r = std::max(len / (2 * kPi), 1e-6);
    s.ellipse.a = s.ellipse.b = r;
    s.ellipse.theta = 0.0;
    s.ellipse.center = a + Point(r, 0.0);
    s.arc0 = kPi;
    s.arc1 = len > 1e-9 ? 3 * kPi : kPi;
    return s;
  }
  const Point u = (b - a) / chord;
  s.ellipse.a = chord / 2.0;
  s.ellipse.b = std::max(1e-6 * chord, 1e-9);
  s.ellipse.center = 0.5 * (a + b);
  double theta = std::atan2(u.y(), u.x());
  if (theta < 0.0) theta += kPi;
  if (theta >= kPi) theta -= kPi;
  s.ellipse.theta = theta;
  // Axis direction now points along or against the travel direction.
  const bool along = Point(std::cos(theta), std::sin(theta)).dot(u) > 0.0;
  s.arc0 = along ? kPi : 0.0;
  s.arc1 = along ? 2 * kPi : kPi;
  return s;
}

} // namespace

Stroke fit_stroke_geometry(std::span<const Point> pts, const BetaParams& beta) {
  if (pts.empty()) throw InvalidInput("fit_stroke_geometry: no points");
  if (pts.size() == 1) return chord_stroke(pts, beta);
  const Point a = pts.front(), b = pts.back();
  const double chord = (b - a).norm();
  const double len = path_length(pts);
  double deviation = 0.0;
  if (chord > 1e-9) {
    const Point u = (b - a) / chord;
    for (const auto& q : pts) deviation = std::max(deviation, std::abs(u.x() * (q - a).y() - u.y() * (q - a).x()));
  }
  const bool straight = chord > 1e-9 && deviation <= 0.02 * chord;
  if (pts.size() < 5 || straight) return chord_stroke(pts, beta);
  try {
    const auto fit = fit_ellipse(pts);
    Stroke s;
    s.beta = beta;
    s.ellipse = fit.ellipse;
    std::tie(s.arc0, s.arc1) = arc_angles(pts, s.ellipse);
    const double tol = std::max(1.0, 0.25 * len);
    if (fit.residual > 0.25 || s.ellipse.a > 1e3 * std::max(len, 1.0) || (s.start() - a).norm() > tol ||
        (s.end() - b).norm() > tol)
      return chord_stroke(pts, beta);
    return s;
  } catch (const DegenerateGeometry&) {
    return chord_stroke(pts, beta);
  }
}

std::vector<double> model_velocity(const BetaEllipticModel& model, std::span<const double> t) {
  std::vector<double> v(t.size(), 0.0);
  for (const auto& s : model.strokes)
    for (std::size_t i = 0; i < t.size(); ++i) v[i] += beta_eval(t[i], s.beta);
  return v;
}

namespace {

// Monotone lookup table x -> y, linear interpolation.
struct Table {
  std::vector<double> x, y;
  double operator()(double q) const {
    if (q <= x.front()) return y.front();
    if (q >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), q);
    const auto j = static_cast<std::size_t>(it - x.begin());
    const double w = (x[j] - x[j - 1]) > 0.0 ? (q - x[j - 1]) / (x[j] - x[j - 1]) : 0.0;
    return y[j - 1] + w * (y[j] - y[j - 1]);
  }
};

constexpr int kTableSteps = 2048;

// Elapsed fraction of the stroke's Beta integral at time t.
Table progress_table(const BetaParams& bp) {
  Table tb;
  tb.x.resize(kTableSteps + 1);
  tb.y.resize(kTableSteps + 1);
  double acc = 0.0, prev = 0.0;
  for (int i = 0; i <= kTableSteps; ++i) {
    const double t = bp.t0 + (bp.t1 - bp.t0) * i / kTableSteps;
    const double b = beta_eval(t, bp);
    if (i > 0) acc += 0.5 * (b + prev) * (bp.t1 - bp.t0) / kTableSteps;
    tb.x[i] = t;
    tb.y[i] = acc;
    prev = b;
  }
  for (auto& y : tb.y) y = acc > 0.0 ? y / acc : 0.0;
  tb.y.back() = 1.0;
  return tb;
}

// Arc-length fraction -> eccentric angle along [arc0, arc1].
Table arc_table(const Stroke& s) {
  Table tb;
  tb.x.resize(kTableSteps + 1);
  tb.y.resize(kTableSteps + 1);
  double acc = 0.0;
  Point prev = s.start();
  for (int i = 0; i <= kTableSteps; ++i) {
    const double ang = s.arc0 + (s.arc1 - s.arc0) * i / kTableSteps;
    const Point cur = ellipse_eval(ang, s.ellipse);
    acc += (cur - prev).norm();
    prev = cur;
    tb.x[i] = acc;
    tb.y[i] = ang;
  }
  for (auto& x : tb.x) x = acc > 0.0 ? x / acc : 0.0;
  if (acc <= 0.0)
    for (int i = 0; i <= kTableSteps; ++i) tb.x[i] = static_cast<double>(i) / kTableSteps;
  return tb;
}

} // namespace

Reconstruction reconstruct(const BetaEllipticModel& model, std::size_t n) {
  if (n < 2) throw InvalidInput("reconstruct: need at least 2 samples");
  model.validate();
  Reconstruction out;
  if (model.strokes.empty()) return out;
  double t_begin = model.strokes.front().beta.t0, t_end = model.strokes.front().beta.t1;
  for (const auto& s : model.strokes) {
    t_begin = std::min(t_begin, s.beta.t0);
    t_end = std::max(t_end, s.beta.t1);
  }
  out.t.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.t[i] = t_begin + (t_end - t_begin) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.velocity = model_velocity(model, out.t);

  std::vector<Table> progress, arcs;
  for (const auto& s : model.strokes) {
    progress.push_back(progress_table(s.beta));
    arcs.push_back(arc_table(s));
  }
  const Point origin = model.strokes.front().start();
  out.trace.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point p = origin;
    for (std::size_t k = 0; k < model.strokes.size(); ++k) {
      const auto& s = model.strokes[k];
      const double f = progress[k](out.t[i]);
      if (f <= 0.0) continue;
      p += ellipse_eval(arcs[k](f), s.ellipse) - s.start();
    }
    out.trace[i] = p;
  }
  return out;
}

double snr_db(std::span<const double> ref, std::span<const double> rec) {
  if (ref.size() != rec.size()) throw InvalidInput("snr_db: size mismatch");
  double sig = 0.0, err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    sig += ref[i] * ref[i];
    err += (ref[i] - rec[i]) * (ref[i] - rec[i]);
  }
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(sig / err);
}

ModelFit fit_model(const ResampledTrace& rs, const VelocityProfile& vp, const ModelFitOptions& opts) {
  ModelFit out;
  if (vp.v.empty()) throw InvalidInput("fit_model: empty velocity profile");
  const auto spans = segment_strokes(vp, opts.segment);

  std::vector<BetaParams> betas;
  for (const auto& sp : spans) {
    try {
      betas.push_back(fit_beta(vp, sp, opts.beta).params);
    } catch (const FitFailure& f) {
      ++out.beta_failures;
      out.warnings.push_back("samples " + std::to_string(sp.first) + "-" + std::to_string(sp.second) + ": " +
                             f.what());
      betas.push_back(f.best.params);
    }
  }

  if (opts.joint_refine) {
    // Strokes of one pen-down piece share a contiguous run of samples.
    std::size_t s = 0;
    while (s < spans.size()) {
      std::size_t e = s;
      while (e + 1 < spans.size() && spans[e + 1].first == spans[e].second) ++e;
      if (e > s) {
        const std::size_t first = spans[s].first, last = spans[e].second;
        std::vector<double> t, v;
        for (std::size_t i = first; i <= last; ++i) {
          t.push_back(vp.time(i));
          v.push_back(vp.v[i]);
        }
        BetaSumProblem problem{t, v, static_cast<int>(e - s + 1), opts.beta.pin_k};
        Eigen::VectorXd x(problem.stride() * problem.strokes);
        for (int k = 0; k < problem.strokes; ++k)
          to_vector(betas[s + static_cast<std::size_t>(k)], x.data() + k * problem.stride(), opts.beta.pin_k);
        levenberg_marquardt(problem, x, opts.beta.lm);
        for (int k = 0; k < problem.strokes; ++k) betas[s + static_cast<std::size_t>(k)] = problem.stroke(x, k);
      }
      s = e + 1;
    }
  }

  struct Item {
    Stroke stroke;
    StrokeSpan span;
  };
  std::vector<Item> items;
  for (std::size_t k = 0; k < spans.size(); ++k) {
    StrokeSpan sp;
    sp.v_first = spans[k].first;
    sp.v_last = spans[k].second;
    const long pf = vp.point_of.empty() ? static_cast<long>(sp.v_first) : vp.point_of[sp.v_first];
    const long pl = vp.point_of.empty() ? static_cast<long>(sp.v_last) : vp.point_of[sp.v_last];
    sp.p_first = static_cast<std::size_t>(std::max(pf, 0L));
    sp.p_last = std::min(static_cast<std::size_t>(std::max(pl, 0L)) + 1, rs.points.size() - 1);
    if (sp.p_last < sp.p_first) sp.p_last = sp.p_first;
    const std::span<const Point> pts(rs.points.data() + sp.p_first, sp.p_last - sp.p_first + 1);
    items.push_back({fit_stroke_geometry(pts, betas[k]), sp});
  }
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& a, const Item& b) { return a.stroke.beta.t0 < b.stroke.beta.t0; });
  for (auto& it : items) {
    out.model.strokes.push_back(it.stroke);
    out.spans.push_back(it.span);
  }

  std::vector<double> t(vp.v.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = vp.time(i);
  out.velocity = model_velocity(out.model, t);
  out.snr = snr_db(vp.v, out.velocity);
  double err = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) err += (vp.v[i] - out.velocity[i]) * (vp.v[i] - out.velocity[i]);
  out.rms = std::sqrt(err / static_cast<double>(t.size()));
  return out;
}

} // namespace hwr
