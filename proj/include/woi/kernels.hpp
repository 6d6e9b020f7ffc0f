#pragma once

#include "woi/common.hpp"

#include <span>
#include <vector>

namespace woi {

// Gamma(d/2 + 1) by the exact integer / half-integer recursion.
double gamma_half_integer_plus_one(int dim);

// Volume of the unit ball in R^d, pi^(d/2) / Gamma(d/2 + 1).
double unit_ball_volume(int dim);

// Coincidence threshold for kernel evaluation.
inline constexpr double kSingularDistance = 1e-14;

// Laplace kernels in R^d.
class KernelContext {
 public:
  explicit KernelContext(int dim);

  int dim() const { return dim_; }
  double unit_ball_volume() const { return ball_volume_; }
  // |S^{d-1}| = d alpha(d)
  double sphere_area() const { return sphere_area_; }

  // Free-space Green's function of -Laplacian:
  //   d = 2:  -(1/2pi) ln|x - y|
  //   d >= 3: |x - y|^(2-d) / (d (d-2) alpha(d))
  double green(Vec const& x, Vec const& y) const;

  // grad_x green = -(x - y) / (d alpha(d) |x - y|^d)
  Vec green_gradient(Vec const& x, Vec const& y) const;

  // K*(x, y) = -d green / d n(x) = ((x - y) . n_x) / (d alpha(d) |x - y|^d)
  double poincare_kernel(Vec const& x, Vec const& n_x, Vec const& y) const;

 private:
  double checked_distance2(Vec const& x, Vec const& y) const;

  int dim_;
  double ball_volume_;
  double sphere_area_;
  double green_scale_;  // 1/(d(d-2)alpha) for d >= 3, 1/(2pi) for d = 2
};

// Query points stored coordinate-major so the per-walker kernel sums vectorize.
class QueryBlock {
 public:
  QueryBlock(int dim, std::span<Vec const> points);

  int dim() const { return dim_; }
  std::size_t size() const { return count_; }
  double const* coord(int k) const { return coords_.data() + static_cast<std::size_t>(k) * stride_; }
  std::size_t stride() const { return stride_; }

 private:
  int dim_;
  std::size_t count_;
  std::size_t stride_;
  std::vector<double> coords_;
};

// A source point with the weight it carries in a walker's contribution.
struct WeightedSource {
  double weight = 0.0;
  Vec y;
};

// out[j] = sum_s weight_s * green(x_j, y_s) for every query x_j.
// Returns the smallest squared distance encountered, so callers can reject
// coincident samples.
double sum_green(KernelContext const& ctx, QueryBlock const& q, std::span<WeightedSource const> sources,
                 std::span<double> out);

// out[k * stride + j] = sum_s weight_s * d green(x_j, y_s) / d x_k.
double sum_green_gradient(KernelContext const& ctx, QueryBlock const& q,
                          std::span<WeightedSource const> sources, std::span<double> out);

}  // namespace woi
