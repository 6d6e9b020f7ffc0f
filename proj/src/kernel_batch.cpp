// Compiled with -ffast-math so the per-query loops vectorize against libmvec.
// Nothing in this file may rely on NaN or infinity semantics; coincidence is
// reported through the returned minimum squared distance instead.

#include "woi/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace woi {
namespace {

// Squared distances from every query to y, written to r2[0..n).
void squared_distances(QueryBlock const& q, Vec const& y, double* r2) {
  std::size_t const n = q.size();
  std::fill(r2, r2 + n, 0.0);
  for (int k = 0; k < q.dim(); ++k) {
    double const* xk = q.coord(k);
    double const yk = y[k];
    for (std::size_t j = 0; j < n; ++j) {
      double const t = xk[j] - yk;
      r2[j] += t * t;
    }
  }
}

double min_of(double const* v, std::size_t n) {
  double m = std::numeric_limits<double>::max();
  for (std::size_t j = 0; j < n; ++j) m = std::min(m, v[j]);
  return m;
}

// r2^(-p/2) for integer p >= 1.
void inverse_power(double const* r2, std::size_t n, int p, double* out) {
  if (p % 2 == 0) {
    int const half = p / 2;
    for (std::size_t j = 0; j < n; ++j) {
      double v = 1.0;
      for (int e = 0; e < half; ++e) v *= r2[j];
      out[j] = 1.0 / v;
    }
  } else {
    int const half = (p - 1) / 2;
    for (std::size_t j = 0; j < n; ++j) {
      double v = std::sqrt(r2[j]);
      for (int e = 0; e < half; ++e) v *= r2[j];
      out[j] = 1.0 / v;
    }
  }
}

thread_local std::vector<double> tl_r2;
thread_local std::vector<double> tl_pow;

}  // namespace

double sum_green(KernelContext const& ctx, QueryBlock const& q, std::span<WeightedSource const> sources,
                 std::span<double> out) {
  std::size_t const n = q.size();
  if (out.size() < n) throw Error("sum_green: output too small");
  tl_r2.resize(q.stride());
  tl_pow.resize(q.stride());
  double* r2 = tl_r2.data();
  double* pw = tl_pow.data();
  int const d = ctx.dim();
  double min_r2 = std::numeric_limits<double>::max();

  for (auto const& src : sources) {
    if (src.weight == 0.0) continue;
    squared_distances(q, src.y, r2);
    min_r2 = std::min(min_r2, min_of(r2, n));
    if (d == 2) {
      double const c = -src.weight / (4.0 * std::numbers::pi);
      for (std::size_t j = 0; j < n; ++j) out[j] += c * std::log(r2[j]);
    } else {
      double const c = src.weight / (d * (d - 2) * ctx.unit_ball_volume());
      inverse_power(r2, n, d - 2, pw);
      for (std::size_t j = 0; j < n; ++j) out[j] += c * pw[j];
    }
  }
  return min_r2;
}

double sum_green_gradient(KernelContext const& ctx, QueryBlock const& q,
                          std::span<WeightedSource const> sources, std::span<double> out) {
  std::size_t const n = q.size();
  std::size_t const stride = q.stride();
  int const d = ctx.dim();
  if (out.size() < stride * static_cast<std::size_t>(d)) throw Error("sum_green_gradient: output too small");
  tl_r2.resize(stride);
  tl_pow.resize(stride);
  double* r2 = tl_r2.data();
  double* pw = tl_pow.data();
  double min_r2 = std::numeric_limits<double>::max();

  for (auto const& src : sources) {
    if (src.weight == 0.0) continue;
    squared_distances(q, src.y, r2);
    min_r2 = std::min(min_r2, min_of(r2, n));
    inverse_power(r2, n, d, pw);
    double const c = -src.weight / ctx.sphere_area();
    for (int k = 0; k < d; ++k) {
      double const* xk = q.coord(k);
      double const yk = src.y[k];
      double* ok = out.data() + static_cast<std::size_t>(k) * stride;
      for (std::size_t j = 0; j < n; ++j) ok[j] += c * (xk[j] - yk) * pw[j];
    }
  }
  return min_r2;
}

}  // namespace woi
