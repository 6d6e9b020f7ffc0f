#include "woi/problems.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace woi {
namespace {

Vec axis_point(int dim, double x1) {
  Vec v = Vec::Zero(dim);
  v[0] = x1;
  return v;
}

// Harmonic field on the Example 3 spheres/circles is a function of (r, angle).
double polar_angle(Vec const& x) { return std::atan2(x[1], x[0]); }

}  // namespace

void attach_manufactured_data(InterfaceProblem& p, VectorField const& grad_u) {
  int const n = p.tree.size();
  p.data.clear();
  for (int i = 0; i < n; ++i) {
    double const jump = i == 0 ? p.tree.sigma[0]
                               : p.tree.sigma[static_cast<std::size_t>(p.tree.parent[static_cast<std::size_t>(i)])] -
                                     p.tree.sigma[static_cast<std::size_t>(i)];
    if (jump == 0.0) {
      p.data.push_back(BoundaryField::zero());
      continue;
    }
    p.data.push_back(BoundaryField::custom("manufactured", [grad_u, jump](Vec const& x, Vec const& nrm) {
      return jump * grad_u(x).dot(nrm);
    }, {{"jump", jump}}));
  }
}

Benchmark example1_harmonic() {
  Benchmark b;
  b.name = "example1";
  auto& t = b.problem.tree;
  t.surfaces = {std::make_shared<Sphere>(make_vec({0.5, -0.5}), 2.0),
                std::make_shared<Sphere>(make_vec({1.1, 0.1}), 0.6),
                std::make_shared<StarCurve2D>(make_vec({-0.3, -1.1}), 0.45, 0.12, 5, 0.0)};
  t.parent = {-1, 0, 0};
  t.sigma = {1.5, 0.5, 1.1};
  b.truth = [](Vec const& x) { return x[0] * x[0] * x[0] - 3.0 * x[0] * x[1] * x[1]; };
  b.truth_gradient = [](Vec const& x) {
    return make_vec({3.0 * x[0] * x[0] - 3.0 * x[1] * x[1], -6.0 * x[0] * x[1]});
  };
  attach_manufactured_data(b.problem, b.truth_gradient);
  b.queries = {QueryKind::kPolarGrid, 40, 40};
  b.steps = 4;
  return b;
}

Benchmark example2_point_charge(int dim) {
  if (dim < 3 || dim > 6) throw ConfigError("example2 is defined for 3 <= d <= 6");
  Benchmark b;
  b.name = "example2-" + std::to_string(dim) + "d";
  auto form = [dim](std::vector<double> head, double tail, double off) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    for (int k = 0; k < dim; ++k) a(k, k) = k < static_cast<int>(head.size()) ? head[static_cast<std::size_t>(k)] : tail;
    a(0, 1) = a(1, 0) = off;
    return a;
  };
  auto& t = b.problem.tree;
  t.surfaces = {std::make_shared<Ellipsoid>(axis_point(dim, 1.3), form({1.0, 0.9}, 1.2, 0.0)),
                std::make_shared<Ellipsoid>(axis_point(dim, 1.4), form({1.5, 3.2}, 2.0, -1.0)),
                std::make_shared<Ellipsoid>(axis_point(dim, 1.6), form({8.0, 6.0}, 4.0, -2.0))};
  t.parent = {-1, 0, 1};
  t.sigma = {1.1, 1.3, 0.9};
  Vec const origin = Vec::Zero(dim);
  for (int i = 0; i < t.size(); ++i) {
    if (t.surface(i).contains(origin)) throw GeometryError("example2: origin lies inside a surface");
  }
  double const e = 2.0 - dim;
  b.truth = [e](Vec const& x) { return std::pow(x.norm(), e); };
  b.truth_gradient = [e, dim](Vec const& x) -> Vec { return e * std::pow(x.norm(), -dim) * x; };
  attach_manufactured_data(b.problem, b.truth_gradient);
  b.queries.kind = QueryKind::kRandomInterior;
  b.queries.count = 1000;
  b.steps = dim + 2;
  b.transition = Transition::kRayCast;
  return b;
}

Example3Constants example3_2d_constants(double alpha, double sigma_ratio, int m) {
  Example3Constants k;
  k.a = (2.0 / m) / (std::pow(alpha, 2 * m) * (sigma_ratio - 1.0) + sigma_ratio + 1.0);
  k.b = 0.5 * k.a * (sigma_ratio + 1.0);
  k.c = k.b - 1.0 / m;
  return k;
}

Benchmark example3_2d(double alpha, double sigma_ratio, int m, double lambda) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("example3-2d needs 0 < alpha < 1");
  if (m < 1) throw ConfigError("example3-2d needs m >= 1");
  Benchmark b;
  b.name = "example3-2d";
  auto& t = b.problem.tree;
  Vec const origin = make_vec({0.0, 0.0});
  t.surfaces = {std::make_shared<Sphere>(origin, 1.0), std::make_shared<Sphere>(origin, alpha)};
  t.parent = {-1, 0};
  t.sigma = {1.0, sigma_ratio};
  b.problem.data = {builtin_field("sin-m-theta", {{"lambda", lambda}, {"m", m}}, t.surface(0)),
                    BoundaryField::zero()};
  auto const k = example3_2d_constants(alpha, sigma_ratio, m);
  b.truth = [k, alpha, m, lambda](Vec const& x) {
    double const r = x.norm();
    double const s = std::sin(m * polar_angle(x));
    if (r <= alpha) return lambda * k.a * std::pow(r, m) * s;
    return lambda * (k.b * std::pow(r, m) + k.c * std::pow(r, -m)) * s;
  };
  b.truth_gradient = [k, alpha, m, lambda](Vec const& x) -> Vec {
    // Im(z^m) and Im(z^m) / r^(2m) are harmonic; differentiate in Cartesian form.
    double const r2 = x.squaredNorm();
    double const th = polar_angle(x);
    double const r = std::sqrt(r2);
    double const rm1 = std::pow(r, m - 1);
    // grad(r^m sin(m th)) = m r^(m-1) (sin((m-1) th), cos((m-1) th))
    Vec const g_in = make_vec({m * rm1 * std::sin((m - 1) * th), m * rm1 * std::cos((m - 1) * th)});
    if (r <= alpha) return lambda * k.a * g_in;
    // grad(r^-m sin(m th)) = m r^(-m-1) (-sin((m+1) th), cos((m+1) th))
    double const rmm1 = std::pow(r, -m - 1);
    Vec const g_out = make_vec({-m * rmm1 * std::sin((m + 1) * th), m * rmm1 * std::cos((m + 1) * th)});
    return lambda * (k.b * g_in + k.c * g_out);
  };
  b.queries = {QueryKind::kPolarGrid, 40, 40};
  b.steps = 4;
  return b;
}

Example3Constants example3_3d_constants(double alpha, double sigma_ratio) {
  Eigen::Matrix3d a;
  a << 0.0, 1.0, -2.0, alpha, -alpha, -1.0 / (alpha * alpha), sigma_ratio, -1.0, 2.0 / (alpha * alpha * alpha);
  Eigen::Vector3d const rhs(std::sqrt(4.0 * std::numbers::pi / 3.0), 0.0, 0.0);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
  if (!lu.isInvertible()) throw DegenerateError("example3-3d: singular constant system");
  Eigen::Vector3d const s = lu.solve(rhs);
  return {s[0], s[1], s[2]};
}

Benchmark example3_3d(double alpha, double sigma_ratio, double lambda) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("example3-3d needs 0 < alpha < 1");
  Benchmark b;
  b.name = "example3-3d";
  auto& t = b.problem.tree;
  Vec const origin = Vec::Zero(3);
  t.surfaces = {std::make_shared<Sphere>(origin, 1.0), std::make_shared<Sphere>(origin, alpha)};
  t.parent = {-1, 0};
  t.sigma = {1.0, sigma_ratio};
  b.problem.data = {builtin_field("spherical-harmonic-11", {{"lambda", lambda}}, t.surface(0)),
                    BoundaryField::zero()};
  auto const k = example3_3d_constants(alpha, sigma_ratio);
  double const norm = std::sqrt(4.0 * std::numbers::pi / 3.0);
  // r Y_1^1 = x1 / sqrt(4 pi / 3).
  b.truth = [k, alpha, lambda, norm](Vec const& x) {
    double const r = x.norm();
    if (r <= alpha) return lambda * k.a * x[0] / norm;
    return lambda * x[0] * (k.b + k.c / (r * r * r)) / norm;
  };
  b.truth_gradient = [k, alpha, lambda, norm](Vec const& x) -> Vec {
    double const r = x.norm();
    Vec e1 = Vec::Zero(3);
    e1[0] = 1.0;
    if (r <= alpha) return lambda * k.a / norm * e1;
    double const r3 = r * r * r;
    double const r5 = r3 * r * r;
    return lambda / norm * ((k.b + k.c / r3) * e1 - 3.0 * k.c * x[0] / r5 * x);
  };
  b.queries.kind = QueryKind::kSurfaceGrid;
  b.queries.n_angular = 40;
  b.queries.n_polar = 20;
  b.queries.surface = 0;
  b.steps = 6;
  b.transition = Transition::kRayCast;
  return b;
}

std::vector<std::string> benchmark_names() {
  return {"example1", "example2", "example2-3d", "example2-4d", "example2-5d", "example2-6d", "example3-2d",
          "example3-3d"};
}

Benchmark make_benchmark(std::string const& name, int dim) {
  if (name == "example1") return example1_harmonic();
  if (name == "example2") return example2_point_charge(dim);
  for (int d = 3; d <= 6; ++d) {
    if (name == "example2-" + std::to_string(d) + "d") return example2_point_charge(d);
  }
  if (name == "example3-2d") return example3_2d();
  if (name == "example3-3d") return example3_3d();
  throw ConfigError("unknown benchmark \"" + name + "\"");
}

std::vector<Vec> polar_grid(Vec const& center, double radius, int n_radial, int n_angular) {
  if (center.size() != 2) throw ConfigError("polar grids are two-dimensional");
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(std::max(0, n_radial * n_angular)));
  for (int i = 0; i < n_radial; ++i) {
    double const r = radius * (i + 0.5) / n_radial;
    for (int j = 0; j < n_angular; ++j) {
      double const th = 2.0 * std::numbers::pi * j / n_angular;
      out.push_back(center + r * make_vec({std::cos(th), std::sin(th)}));
    }
  }
  return out;
}

std::vector<Vec> random_interior(Surface const& boundary, std::uint64_t count, std::uint64_t seed) {
  RandomStream rng(seed, stream_id(StreamTag::kQueries, 0));
  Vec const c = boundary.center();
  double const r = boundary.bounding_radius();
  int const d = boundary.dim();
  std::vector<Vec> out;
  out.reserve(count);
  while (out.size() < count) {
    Vec x(d);
    for (int k = 0; k < d; ++k) x[k] = c[k] + rng.uniform(-r, r);
    if (boundary.contains(x)) out.push_back(x);
  }
  return out;
}

std::vector<Vec> sphere_grid(Sphere const& s, int n_azimuth, int n_polar) {
  if (s.dim() != 3) throw ConfigError("theta-phi grids need a sphere in R^3");
  std::vector<Vec> out;
  for (int j = 0; j < n_polar; ++j) {
    double const phi = std::numbers::pi * (j + 0.5) / n_polar;
    for (int k = 0; k < n_azimuth; ++k) {
      double const th = 2.0 * std::numbers::pi * k / n_azimuth;
      Vec const u = make_vec({std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th), std::cos(phi)});
      out.push_back(s.center() + s.radius() * u);
    }
  }
  return out;
}

std::vector<Vec> make_queries(Benchmark const& b, std::uint64_t seed) {
  Surface const& outer = b.problem.tree.surface(0);
  switch (b.queries.kind) {
    case QueryKind::kPolarGrid:
      return polar_grid(outer.center(), outer.bounding_radius(), b.queries.n_radial, b.queries.n_angular);
    case QueryKind::kRandomInterior:
      return random_interior(outer, b.queries.count, seed);
    case QueryKind::kSurfaceGrid: {
      auto const* sphere = dynamic_cast<Sphere const*>(&b.problem.tree.surface(b.queries.surface));
      if (sphere == nullptr) throw ConfigError("surface grids require a spherical surface");
      return sphere_grid(*sphere, b.queries.n_angular, b.queries.n_polar);
    }
  }
  throw Error("unknown query kind");
}

L2Error l2_error(std::span<double const> estimates, std::span<double const> truth, std::size_t ref) {
  if (estimates.size() != truth.size()) throw Error("l2_error: size mismatch");
  if (ref >= estimates.size()) throw Error("l2_error: reference point missing from the estimate batch");
  double const shift = truth[ref] - estimates[ref];
  double err2 = 0.0;
  double norm2 = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    double const e = truth[j] - (estimates[j] + shift);
    err2 += e * e;
    norm2 += truth[j] * truth[j];
  }
  L2Error out;
  out.l2 = std::sqrt(err2);
  out.relative = norm2 > 0.0 ? out.l2 / std::sqrt(norm2) : std::numeric_limits<double>::infinity();
  return out;
}

L2Error l2_error(std::span<Vec const> queries, std::span<double const> estimates, std::span<double const> truth,
                 Vec const& x_ref) {
  for (std::size_t j = 0; j < queries.size(); ++j) {
    if (queries[j].size() == x_ref.size() && queries[j] == x_ref) return l2_error(estimates, truth, j);
  }
  throw Error("l2_error: reference point missing from the estimate batch");
}

L2Error gradient_l2_error(std::span<double const> estimates, std::span<double const> truth) {
  if (estimates.size() != truth.size()) throw Error("gradient_l2_error: size mismatch");
  double err2 = 0.0;
  double norm2 = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    double const e = truth[j] - estimates[j];
    err2 += e * e;
    norm2 += truth[j] * truth[j];
  }
  L2Error out;
  out.l2 = std::sqrt(err2);
  out.relative = norm2 > 0.0 ? out.l2 / std::sqrt(norm2) : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace woi
