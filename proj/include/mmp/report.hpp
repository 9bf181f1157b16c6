#pragma once

// JSON summaries shared by the command line and the HTTP service.

#include "mmp/engine.hpp"
#include "mmp/io.hpp"
#include "mmp/toric.hpp"

namespace mmp::report {

/// Completeness, simplicity, regularity and terminality of a fan, with one
/// entry per maximal cone. Two-dimensional singular cones also report the
/// exceptional chain of their minimal resolution and its discrepancies.
io::Json fan_report(const toric::Fan& f);

/// Picard number, K+B, the number of (K+B)-negative certified rays, and the
/// backend-specific data: the fan report and kappa(K+B) for complete toric
/// pairs, the (-1)-curves and the positivity of -(K+B) for surfaces.
io::Json pair_report(const engine::Pair& p);

}  // namespace mmp::report
