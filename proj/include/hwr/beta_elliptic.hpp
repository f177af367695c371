#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hwr/error.hpp"
#include "hwr/levenberg_marquardt.hpp"
#include "hwr/trajectory.hpp"

namespace hwr {

// ---------------------------------------------------------------------------
// Beta velocity profile

template <typename Scalar>
struct BetaParamsT {
  Scalar t0 = Scalar(0);
  Scalar t1 = Scalar(1);
  Scalar p = Scalar(2);
  Scalar q = Scalar(2);
  Scalar k = Scalar(1);

  bool valid() const {
    return t0 < t1 && p > Scalar(0) && q > Scalar(0) && k > Scalar(0) && std::isfinite(double(t0)) &&
           std::isfinite(double(t1));
  }
};
using BetaParams = BetaParamsT<double>;

/// Time of the velocity peak, t_c = (p t1 + q t0) / (p + q).
template <typename Scalar>
Scalar inflexion_time(const BetaParamsT<Scalar>& bp) {
  if (!bp.valid()) throw InvalidInput("beta: invalid parameters");
  return (bp.p * bp.t1 + bp.q * bp.t0) / (bp.p + bp.q);
}

/// k ((t - t0) / (tc - t0))^p ((t1 - t) / (t1 - tc))^q on [t0, t1], 0 elsewhere.
template <typename Scalar>
Scalar beta_eval(Scalar t, const BetaParamsT<Scalar>& bp) {
  const Scalar tc = inflexion_time(bp);
  if (t < bp.t0 || t > bp.t1) return Scalar(0);
  using std::pow;
  return bp.k * pow((t - bp.t0) / (tc - bp.t0), bp.p) * pow((bp.t1 - t) / (bp.t1 - tc), bp.q);
}

/// Integral of beta_eval over its support (closed form via the Beta function).
double beta_integral(const BetaParams& bp);

// ---------------------------------------------------------------------------
// Elliptic arc geometry

template <typename Scalar>
struct EllipseParamsT {
  Scalar a = Scalar(1);
  Scalar b = Scalar(1);
  Scalar theta = Scalar(0);
  Eigen::Matrix<Scalar, 2, 1> center = Eigen::Matrix<Scalar, 2, 1>::Zero();
};
using EllipseParams = EllipseParamsT<double>;

/// center + R(theta) (a cos angle, b sin angle).
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> ellipse_eval(Scalar angle, const EllipseParamsT<Scalar>& ep) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(ep.theta), s = sin(ep.theta);
  const Scalar x = ep.a * cos(angle), y = ep.b * sin(angle);
  return ep.center + Eigen::Matrix<Scalar, 2, 1>(c * x - s * y, s * x + c * y);
}

/// Point coordinates in the ellipse's own frame (X along the a-axis).
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> to_ellipse_frame(const Eigen::Matrix<Scalar, 2, 1>& p, const EllipseParamsT<Scalar>& ep) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(ep.theta), s = sin(ep.theta);
  const Eigen::Matrix<Scalar, 2, 1> d = p - ep.center;
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
}

struct Stroke {
  BetaParams beta;
  EllipseParams ellipse;
  double arc0 = 0.0; ///< eccentric angle where the stroke enters the ellipse
  double arc1 = 0.0; ///< exit angle; arc1 < arc0 means clockwise travel

  Point start() const { return ellipse_eval(arc0, ellipse); }
  Point end() const { return ellipse_eval(arc1, ellipse); }
  Point midpoint() const { return ellipse_eval(0.5 * (arc0 + arc1), ellipse); }
};

struct BetaEllipticModel {
  std::vector<Stroke> strokes;
  /// Throws InvalidInput unless every stroke is valid and t0 is non-decreasing.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Segmentation and fitting

struct SegmentOptions {
  int smooth_window = 5;
  /// Peaks separated by a dip shallower than this fraction of the piece's
  /// maximum are merged.
  double min_prominence = 0.05;
};

/// Inclusive sample intervals [first, last] between velocity minima. Adjacent
/// intervals share their boundary sample; break samples are never inside an
/// interval.
std::vector<std::pair<std::size_t, std::size_t>> segment_strokes(const VelocityProfile& vp,
                                                                 const SegmentOptions& opts = {});

struct BetaFitOptions {
  LmOptions lm;
  bool pin_k = false;
};

struct BetaFit {
  BetaParams params;
  double rms = 0.0;
  int iterations = 0;
  bool converged = false;
};

class FitFailure : public Error {
public:
  FitFailure(const std::string& what, BetaFit best) : Error(what), best(best) {}
  BetaFit best;
};

/// Least squares Beta profile over samples span.first .. span.second
/// (inclusive), times t_i = i * dt. Throws FitFailure on a flat profile or
/// when the optimizer does not converge within max_iter.
BetaFit fit_beta(const VelocityProfile& vp, std::pair<std::size_t, std::size_t> span, const BetaFitOptions& opts = {});

/// Gradient of 0.5 * sum (beta(t_i) - v_i)^2 with respect to (t0, t1, p, q, k).
Eigen::Matrix<double, 5, 1> beta_cost_gradient(const BetaParams& bp, std::span<const double> t,
                                              std::span<const double> v);

struct EllipseFit {
  EllipseParams ellipse;
  /// Mean |X^2/a^2 + Y^2/b^2 - 1| over the input points.
  double residual = 0.0;
};

/// Direct least-squares ellipse fit (numerically stable Fitzgibbon scheme on
/// centred, scaled data). Output has a >= b and theta in [0, pi). Throws
/// DegenerateGeometry for fewer than 5 points, collinear points, or when
/// the best conic is not an ellipse.
EllipseFit fit_ellipse(std::span<const Point> pts);

/// Eccentric angles of the first and last point, unwrapped along the points.
std::pair<double, double> arc_angles(std::span<const Point> pts, const EllipseParams& ep);

/// Ellipse fit with a chord fallback for nearly straight spans, plus arcs.
Stroke fit_stroke_geometry(std::span<const Point> pts, const BetaParams& beta);

struct Reconstruction {
  std::vector<double> t;
  std::vector<double> velocity;
  Polyline trace;
};

/// Velocity is the sum of the strokes' Beta profiles on n uniform samples of
/// [min t0, max t1]. Each stroke moves the pen along its arc (arc-length
/// parametrized) by the fraction of its Beta integral elapsed, so
/// displacements superpose and consecutive arcs join end to start.
Reconstruction reconstruct(const BetaEllipticModel& model, std::size_t n);

/// 10 log10(sum ref^2 / sum (ref - rec)^2).
double snr_db(std::span<const double> ref, std::span<const double> rec);

struct ModelFitOptions {
  SegmentOptions segment;
  BetaFitOptions beta;
  /// Refine all strokes of a pen-down piece jointly on the summed profile.
  bool joint_refine = true;
};

struct StrokeSpan {
  std::size_t v_first = 0, v_last = 0; ///< velocity samples (inclusive)
  std::size_t p_first = 0, p_last = 0; ///< trace points (inclusive)
};

struct ModelFit {
  BetaEllipticModel model;
  std::vector<StrokeSpan> spans;
  std::vector<double> velocity; ///< reconstructed on the input sample grid
  double snr = 0.0;
  double rms = 0.0;
  int beta_failures = 0;
  std::vector<std::string> warnings;
};

/// Segments the profile, fits one Beta-elliptic stroke per interval and
/// evaluates the reconstruction on the input grid.
ModelFit fit_model(const ResampledTrace& rs, const VelocityProfile& vp, const ModelFitOptions& opts = {});

/// Sum of stroke profiles at the given times.
std::vector<double> model_velocity(const BetaEllipticModel& model, std::span<const double> t);

} // namespace hwr
