#pragma once

#include <filesystem>
#include <iosfwd>

#include "hwr/beta_elliptic.hpp"

namespace hwr {

// {"strokes":[{"t0","t1","p","q","k","theta","a","b","cx","cy","arc0","arc1"}]}
// Fields are written in that order with 17 significant digits.
void write_model_json(const BetaEllipticModel& model, std::ostream& out);
void write_model_json(const BetaEllipticModel& model, const std::filesystem::path& path);

/// Throws InvalidInput on malformed documents or invalid stroke parameters.
BetaEllipticModel read_model_json(std::istream& in);
BetaEllipticModel read_model_json(const std::filesystem::path& path);

} // namespace hwr
