#pragma once

#include "woi/densities.hpp"
#include "woi/estimators.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace woi {

using ScalarField = std::function<double(Vec const&)>;
using VectorField = std::function<Vec(Vec const&)>;

enum class QueryKind { kPolarGrid, kRandomInterior, kSurfaceGrid };

// Default query set of a benchmark.
struct QuerySpec {
  QueryKind kind = QueryKind::kPolarGrid;
  int n_radial = 40;     // polar grid
  int n_angular = 40;    // polar grid, and theta count of the surface grid
  int n_polar = 20;      // phi count of the surface grid
  int surface = 0;       // surface grid target
  std::uint64_t count = 1000;  // random interior points
};

struct Benchmark {
  std::string name;
  InterfaceProblem problem;
  ScalarField truth;             // empty when unknown
  VectorField truth_gradient;    // empty when unknown
  std::optional<Vec> x_ref;      // defaults to the first query point
  QuerySpec queries;
  int steps = 4;                 // recommended M
  Transition transition = Transition::kUniformArea;
};

// Outer circle r = 2 at (0.5, -0.5), inner circle, and a five-lobed star;
// truth x1^3 - 3 x1 x2^2 with data b_i = [sigma] d_n u.
Benchmark example1_harmonic();

// Three nested ellipsoids in R^d (d in 3..6), truth |x|^(2-d).
Benchmark example2_point_charge(int dim);

struct Example3Constants {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

// Concentric circles r = 1, alpha; d_r u = lambda sin(m theta) on r = 1.
Example3Constants example3_2d_constants(double alpha, double sigma_ratio, int m);
Benchmark example3_2d(double alpha = 0.4, double sigma_ratio = 1.0 / 3.0, int m = 3, double lambda = 20.0);

// Concentric spheres r = 1, alpha; d_r u = lambda sin(phi) cos(theta) on r = 1.
Example3Constants example3_3d_constants(double alpha, double sigma_ratio);
Benchmark example3_3d(double alpha = 0.4, double sigma_ratio = 0.5, double lambda = 5.0);

// "example1", "example2" (with dim), "example2-<d>d", "example3-2d", "example3-3d".
Benchmark make_benchmark(std::string const& name, int dim = 3);
std::vector<std::string> benchmark_names();

// Derives b_1 = sigma_1 d_n u and b_i = (sigma_parent - sigma_i) d_n u from a
// smooth global harmonic u.
void attach_manufactured_data(InterfaceProblem& p, VectorField const& grad_u);

// Query generators.
std::vector<Vec> polar_grid(Vec const& center, double radius, int n_radial, int n_angular);
std::vector<Vec> random_interior(Surface const& boundary, std::uint64_t count, std::uint64_t seed);
// phi_j = pi (j + 0.5) / n_polar, theta_k = 2 pi k / n_azimuth; rows ordered by (phi, theta).
std::vector<Vec> sphere_grid(Sphere const& s, int n_azimuth, int n_polar);
std::vector<Vec> make_queries(Benchmark const& b, std::uint64_t seed);

struct L2Error {
  double l2 = 0.0;
  double relative = 0.0;
};

// e_j = |u_j - (uhat_j - uhat_ref + u_ref)| with ref the position of x_ref in
// `queries`; throws Error when x_ref is not a query point.
L2Error l2_error(std::span<Vec const> queries, std::span<double const> estimates, std::span<double const> truth,
                 Vec const& x_ref);
L2Error l2_error(std::span<double const> estimates, std::span<double const> truth, std::size_t ref);

// Gradients carry no gauge: plain relative L2 over all components.
L2Error gradient_l2_error(std::span<double const> estimates, std::span<double const> truth);

}  // namespace woi
