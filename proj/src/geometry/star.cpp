#include "woi/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace woi {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec unit(double theta) { return make_vec({std::cos(theta), std::sin(theta)}); }

}  // namespace

StarCurve2D::StarCurve2D(Vec center, double base_radius, double amplitude, int lobes, double rotation)
    : center_(std::move(center)),
      base_radius_(base_radius),
      amplitude_(amplitude),
      lobes_(lobes),
      rotation_(rotation) {
  if (center_.size() != 2) throw GeometryError("star curve lives in R^2");
  if (!(base_radius_ > 0.0)) throw GeometryError("star base radius must be positive");
  if (!(std::abs(amplitude_) < base_radius_)) throw GeometryError("star amplitude must satisfy |a| < R");
  if (lobes_ < 1) throw GeometryError("star lobe count must be positive");
  if (!std::isfinite(rotation_)) throw GeometryError("star rotation must be finite");

  // Periodic trapezoid rule; the integrand is smooth and 2pi-periodic.
  int const n = 512 * std::max(lobes_, 8);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += speed(kTwoPi * i / n);
  perimeter_ = kTwoPi * sum / n;
  double const rmax = base_radius_ + std::abs(amplitude_);
  max_speed_ = std::sqrt(rmax * rmax + amplitude_ * amplitude_ * lobes_ * lobes_);
}

double StarCurve2D::polar_radius(double theta) const {
  return base_radius_ + amplitude_ * std::cos(lobes_ * (theta - rotation_));
}

double StarCurve2D::polar_radius_derivative(double theta) const {
  return -amplitude_ * lobes_ * std::sin(lobes_ * (theta - rotation_));
}

double StarCurve2D::speed(double theta) const {
  return std::hypot(polar_radius(theta), polar_radius_derivative(theta));
}

Vec StarCurve2D::point_at(double theta) const { return center_ + polar_radius(theta) * unit(theta); }

double StarCurve2D::residual(Vec const& y) const {
  Vec const r = y - center_;
  return (r.norm() - polar_radius(std::atan2(r[1], r[0]))) / base_radius_;
}

Vec StarCurve2D::gradient(Vec const& y) const {
  // F = rho - r(theta); grad F = e_rho - r'(theta) / rho * e_theta.
  Vec const r = y - center_;
  double const rho = r.norm();
  double const theta = std::atan2(r[1], r[0]);
  Vec const e_rho = unit(theta);
  Vec const e_theta = make_vec({-e_rho[1], e_rho[0]});
  return e_rho - (polar_radius_derivative(theta) / rho) * e_theta;
}

SurfaceSample StarCurve2D::sample_uniform(RandomStream& rng) const {
  // theta is uniform; thinning by speed makes the arc length uniform.
  for (;;) {
    double const theta = rng.uniform(0.0, kTwoPi);
    if (rng.uniform() * max_speed_ < speed(theta)) {
      Vec const y = point_at(theta);
      return {{y, normal(y)}, 1.0 / perimeter_};
    }
  }
}

SurfacePoint StarCurve2D::reflect(SurfacePoint const& p) const {
  // Mirror across the symmetry axis at angle `rotation` through the center.
  Vec const axis = unit(rotation_);
  auto mirror = [&](Vec const& v) -> Vec { return 2.0 * v.dot(axis) * axis - v; };
  return {center_ + mirror(p.x - center_), mirror(p.n)};
}

std::vector<Crossing> StarCurve2D::line_roots(Vec const& origin, Vec const& direction) const {
  // A curve point c + r(theta) e(theta) lies on the line iff
  //   f(theta) = r(theta) (n . e(theta)) - n . (o - c) = 0,  n = perp(direction).
  Vec const nl = make_vec({-direction[1], direction[0]});
  double const h = nl.dot(origin - center_);
  auto f = [&](double theta) { return polar_radius(theta) * nl.dot(unit(theta)) - h; };

  std::vector<Crossing> out;
  int const n = bracket_count();
  double lo = 0.0;
  double f_lo = f(lo);
  for (int i = 1; i <= n; ++i) {
    double const hi = kTwoPi * i / n;
    double const f_hi = (i == n) ? f(0.0) : f(hi);
    if ((f_lo > 0.0) != (f_hi > 0.0)) {
      double a = lo;
      double b = hi;
      bool const a_positive = f_lo > 0.0;
      for (int it = 0; it < 64 && b - a > 1e-15; ++it) {
        double const mid = 0.5 * (a + b);
        if ((f(mid) > 0.0) == a_positive) {
          a = mid;
        } else {
          b = mid;
        }
      }
      Vec const y = point_at(0.5 * (a + b));
      double const t = direction.dot(y - origin);
      out.push_back({t, origin + t * direction, false});
    }
    lo = hi;
    f_lo = f_hi;
  }
  std::sort(out.begin(), out.end(), [](Crossing const& x, Crossing const& y) { return x.t < y.t; });
  return out;
}

bool StarCurve2D::contains(Vec const& x) const {
  // Star-shaped about the center, so the polar test is exact.
  Vec const r = x - center_;
  double const rho = r.norm();
  if (rho == 0.0) return true;
  return rho < polar_radius(std::atan2(r[1], r[0]));
}

double StarCurve2D::distance(Vec const& x) const {
  Vec const r = x - center_;
  double const rho = r.norm();
  if (rho < 1e-12 * base_radius_) return base_radius_ - std::abs(amplitude_);
  double const theta = std::atan2(r[1], r[0]);
  double const dr = polar_radius_derivative(theta) / rho;
  return std::abs(rho - polar_radius(theta)) / std::sqrt(1.0 + dr * dr);
}

}  // namespace woi
