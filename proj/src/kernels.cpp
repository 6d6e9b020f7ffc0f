#include "woi/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace woi {

double gamma_half_integer_plus_one(int dim) {
  if (dim < 1 || dim > 64) throw Error("gamma recursion supports 1 <= d <= 64, got " + std::to_string(dim));
  // Gamma(x + 1) = x Gamma(x), seeded at Gamma(1) = 1 or Gamma(1/2) = sqrt(pi).
  double value = (dim % 2 == 0) ? 1.0 : std::sqrt(std::numbers::pi);
  for (int twice = (dim % 2 == 0) ? 2 : 1; twice <= dim; twice += 2) value *= 0.5 * twice;
  return value;
}

double unit_ball_volume(int dim) {
  return std::pow(std::numbers::pi, 0.5 * dim) / gamma_half_integer_plus_one(dim);
}

KernelContext::KernelContext(int dim)
    : dim_(dim), ball_volume_(woi::unit_ball_volume(dim)), sphere_area_(dim * ball_volume_) {
  if (dim < 2) throw Error("kernels require d >= 2");
  if (dim > kMaxDim) throw Error("dimension exceeds kMaxDim");
  green_scale_ = dim == 2 ? 1.0 / (2.0 * std::numbers::pi) : 1.0 / (dim * (dim - 2) * ball_volume_);
}

double KernelContext::checked_distance2(Vec const& x, Vec const& y) const {
  double const r2 = (x - y).squaredNorm();
  if (!(r2 >= kSingularDistance * kSingularDistance)) {
    throw SingularityError("kernel evaluated at coincident points");
  }
  return r2;
}

double KernelContext::green(Vec const& x, Vec const& y) const {
  double const r2 = checked_distance2(x, y);
  if (dim_ == 2) return -0.5 * green_scale_ * std::log(r2);
  return green_scale_ * std::pow(r2, 0.5 * (2 - dim_));
}

Vec KernelContext::green_gradient(Vec const& x, Vec const& y) const {
  double const r2 = checked_distance2(x, y);
  double const rd = std::pow(r2, 0.5 * dim_);
  return -(x - y) / (sphere_area_ * rd);
}

double KernelContext::poincare_kernel(Vec const& x, Vec const& n_x, Vec const& y) const {
  double const r2 = checked_distance2(x, y);
  double const rd = std::pow(r2, 0.5 * dim_);
  return (x - y).dot(n_x) / (sphere_area_ * rd);
}

QueryBlock::QueryBlock(int dim, std::span<Vec const> points)
    : dim_(dim), count_(points.size()), stride_((points.size() + 7) / 8 * 8) {
  coords_.assign(stride_ * static_cast<std::size_t>(dim), 0.0);
  for (std::size_t j = 0; j < count_; ++j) {
    if (points[j].size() != dim) throw Error("query point dimension mismatch");
    for (int k = 0; k < dim; ++k) coords_[static_cast<std::size_t>(k) * stride_ + j] = points[j][k];
  }
}

}  // namespace woi
