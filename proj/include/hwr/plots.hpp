#pragma once

#include <iosfwd>

#include "hwr/beta_elliptic.hpp"
#include "hwr/skeleton_graph.hpp"
#include "hwr/trajectory.hpp"

namespace hwr {

// SVG renderings of each pipeline stage. Word-sized rasters are magnified.

/// Ink mask, skeleton, characteristic points and segments coloured by type.
void plot_skeleton(const BinaryImage& word, const SegmentGraph& g, std::ostream& out);

/// Ordered trace over an optional ink mask; hue follows pen order and the
/// start of each stroke is marked.
void plot_trace(const OrderedTrace& tr, const BinaryImage* ink, std::ostream& out);

/// Measured speed, the fitted sum and each stroke's Beta profile.
void plot_velocity(const VelocityProfile& vp, const BetaEllipticModel& model, std::ostream& out);

/// Reconstructed trace with each stroke's supporting ellipse and arc.
void plot_model(const BetaEllipticModel& model, std::ostream& out);

} // namespace hwr
