#pragma once

#include "woi/geometry.hpp"

namespace woi::detail {

// Roots of a t^2 + 2 b t + c = 0 along origin + t * direction, a > 0.
// A half-chord below 1e-6 * scale collapses to one tangent contact.
std::vector<Crossing> quadric_line_roots(double a, double b, double c, double scale, Vec const& origin,
                                         Vec const& direction);

}  // namespace woi::detail
