#include "quadric.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace woi {
namespace {

// E|g| for g ~ N(0, I_d).
double mean_gaussian_norm(int d) {
  return std::sqrt(2.0) * std::exp(std::lgamma(0.5 * (d + 1)) - std::lgamma(0.5 * d));
}

// E|z| for z ~ N(0, diag(lambda)), from
//   sqrt(s) = 1/(2 sqrt(pi)) * int_0^inf (1 - exp(-t s)) t^(-3/2) dt
// with t = e^x and the trapezoid rule, which is spectrally accurate here.
double mean_gaussian_norm(Eigen::VectorXd const& lambda) {
  constexpr double lo = -60.0;
  constexpr double hi = 60.0;
  constexpr double h = 0.05;
  int const n = static_cast<int>((hi - lo) / h);
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    double const x = lo + i * h;
    double const t = std::exp(x);
    double log_mgf = 0.0;
    for (Eigen::Index j = 0; j < lambda.size(); ++j) log_mgf -= 0.5 * std::log1p(2.0 * t * lambda[j]);
    sum += -std::expm1(log_mgf) * std::exp(-0.5 * x);
  }
  return h * sum / (2.0 * std::sqrt(std::numbers::pi));
}

}  // namespace

Ellipsoid::Ellipsoid(Vec center, Eigen::MatrixXd form) : center_(std::move(center)), form_(std::move(form)) {
  int const d = static_cast<int>(center_.size());
  if (d < 2 || d > kMaxDim) throw GeometryError("ellipsoid dimension out of range");
  if (form_.rows() != d || form_.cols() != d) throw GeometryError("ellipsoid form must be d x d");
  if (!form_.allFinite()) throw GeometryError("ellipsoid form has non-finite entries");
  if ((form_ - form_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * form_.cwiseAbs().maxCoeff()) {
    throw GeometryError("ellipsoid form must be symmetric");
  }
  form_ = 0.5 * (form_ + form_.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(form_, Eigen::EigenvaluesOnly);
  Eigen::VectorXd const lambda = eig.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) throw GeometryError("ellipsoid form must be positive definite");

  Eigen::LLT<Eigen::MatrixXd> llt(form_);
  chol_lower_ = llt.matrixL();
  sphere_to_surface_ = chol_lower_.transpose().triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(d, d));
  max_stretch_ = std::sqrt(lambda.maxCoeff());
  max_semi_axis_ = 1.0 / std::sqrt(lambda.minCoeff());

  // |S| = det(A)^(-1/2) * |S^{d-1}| * E_u|L u|, u uniform on the unit sphere.
  double const inv_sqrt_det = std::exp(-0.5 * lambda.array().log().sum());
  double const mean_stretch = mean_gaussian_norm(lambda) / mean_gaussian_norm(d);
  area_ = inv_sqrt_det * d * unit_ball_volume(d) * mean_stretch;
}

double Ellipsoid::residual(Vec const& y) const {
  Vec const r = y - center_;
  return r.dot(form_ * r) - 1.0;
}

Vec Ellipsoid::gradient(Vec const& y) const { return form_ * (y - center_); }

SurfaceSample Ellipsoid::sample_uniform(RandomStream& rng) const {
  // Sphere samples pushed through u -> c + L^{-T} u, thinned by the area
  // distortion |L u| relative to its maximum.
  int const d = dim();
  for (;;) {
    Vec const u = rng.direction(d);
    Vec const lu = chol_lower_ * u;
    double const stretch = lu.norm();
    if (rng.uniform() * max_stretch_ < stretch) {
      Vec const y = center_ + sphere_to_surface_ * u;
      return {{y, lu / stretch}, 1.0 / area_};
    }
  }
}

SurfacePoint Ellipsoid::reflect(SurfacePoint const& p) const { return {2.0 * center_ - p.x, -p.n}; }

std::vector<Crossing> Ellipsoid::line_roots(Vec const& origin, Vec const& direction) const {
  Vec const oc = origin - center_;
  Vec const ad = form_ * direction;
  return detail::quadric_line_roots(direction.dot(ad), ad.dot(oc), oc.dot(form_ * oc) - 1.0, max_semi_axis_,
                                    origin, direction);
}

bool Ellipsoid::contains(Vec const& x) const { return residual(x) < 0.0; }

double Ellipsoid::distance(Vec const& x) const {
  // First-order distance to the level set of sqrt(q) - 1.
  Vec const r = x - center_;
  Vec const g = form_ * r;
  double const q = r.dot(g);
  double const gn = g.norm();
  if (gn == 0.0) return 1.0 / max_stretch_;
  return std::abs(std::sqrt(q) - 1.0) * std::sqrt(q) / gn;
}

}  // namespace woi
