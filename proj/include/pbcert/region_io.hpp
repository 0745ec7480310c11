#pragma once

#include <iosfwd>

#include "pbcert/goodwin.hpp"

namespace pbcert::goodwin {

/// Header tau,lambda,label,witness_rho,witness_beta,margin; tau varies fastest.
void write_region_csv(const RegionGrid& grid, std::ostream& out);

/// 800x600 chart, tau horizontal and lambda vertical, with the curve
/// kappa0 tau^3 exp(lambda tau) = 84.2 overlaid.
void write_region_svg(const RegionGrid& grid, std::ostream& out);

}  // namespace pbcert::goodwin
