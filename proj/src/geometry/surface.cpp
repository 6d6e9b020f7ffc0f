#include "quadric.hpp"

#include <algorithm>
#include <cmath>

namespace woi {

Ray::Ray(Vec origin_, Vec direction_) : origin(std::move(origin_)), direction(std::move(direction_)) {
  if (origin.size() != direction.size()) throw GeometryError("ray origin and direction differ in dimension");
  if (std::abs(direction.norm() - 1.0) > 1e-12) throw GeometryError("ray direction must be a unit vector");
}

Vec Surface::normal(Vec const& y) const {
  if (y.size() != dim()) throw GeometryError("point dimension does not match surface");
  if (!(std::abs(residual(y)) <= kOnSurfaceTolerance)) throw GeometryError("point is not on the surface");
  Vec g = gradient(y);
  return g / g.norm();
}

std::vector<Crossing> Surface::intersect(Ray const& ray) const {
  auto roots = line_roots(ray.origin, ray.direction);
  std::erase_if(roots, [](Crossing const& c) { return !(c.t > kRayEpsilon); });
  return roots;
}

std::vector<Crossing> line_crossings(Surface const& s, Vec const& origin, Vec const& direction) {
  auto roots = s.line_roots(origin, direction);
  std::erase_if(roots, [](Crossing const& c) { return c.tangent || std::abs(c.t) <= kRayEpsilon; });
  return roots;
}

namespace detail {

std::vector<Crossing> quadric_line_roots(double a, double b, double c, double scale, Vec const& origin,
                                         Vec const& direction) {
  std::vector<Crossing> out;
  double const disc = b * b - a * c;
  if (disc < 0.0) return out;
  if (disc < 1e-12 * scale * scale * a * a) {
    double const t = -b / a;
    out.push_back({t, origin + t * direction, true});
    return out;
  }
  // Cancellation-free pairing of the two roots.
  double const q = -(b + std::copysign(std::sqrt(disc), b));
  double t0 = q / a;
  double t1 = c / q;
  if (t0 > t1) std::swap(t0, t1);
  out.push_back({t0, origin + t0 * direction, false});
  out.push_back({t1, origin + t1 * direction, false});
  return out;
}

}  // namespace detail
}  // namespace woi
