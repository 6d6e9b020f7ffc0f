#include "quadric.hpp"

#include <cmath>

namespace woi {

Sphere::Sphere(Vec center, double radius) : center_(std::move(center)), radius_(radius) {
  int const d = static_cast<int>(center_.size());
  if (d < 2 || d > kMaxDim) throw GeometryError("sphere dimension out of range");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw GeometryError("sphere radius must be positive");
  area_ = d * unit_ball_volume(d) * std::pow(radius_, d - 1);
}

double Sphere::residual(Vec const& y) const { return (y - center_).norm() / radius_ - 1.0; }

SurfaceSample Sphere::sample_uniform(RandomStream& rng) const {
  Vec const u = rng.direction(dim());
  return {{center_ + radius_ * u, u}, 1.0 / area_};
}

SurfacePoint Sphere::reflect(SurfacePoint const& p) const { return {2.0 * center_ - p.x, -p.n}; }

std::vector<Crossing> Sphere::line_roots(Vec const& origin, Vec const& direction) const {
  Vec const oc = origin - center_;
  return detail::quadric_line_roots(direction.squaredNorm(), direction.dot(oc), oc.squaredNorm() - radius_ * radius_,
                                    radius_, origin, direction);
}

bool Sphere::contains(Vec const& x) const { return (x - center_).squaredNorm() < radius_ * radius_; }

double Sphere::distance(Vec const& x) const { return std::abs((x - center_).norm() - radius_); }

}  // namespace woi
