#pragma once

#include "woi/geometry.hpp"
#include "woi/rng.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace woi {

// Scalar data on a surface, evaluated at a surface point and its outward normal.
struct BoundaryField {
  std::function<double(Vec const& x, Vec const& n)> eval;
  std::string name = "zero";
  nlohmann::json params = nlohmann::json::object();
  bool identically_zero = true;

  double operator()(Vec const& x, Vec const& n) const { return identically_zero ? 0.0 : eval(x, n); }

  static BoundaryField zero();
  static BoundaryField custom(std::string name, std::function<double(Vec const&, Vec const&)> fn,
                              nlohmann::json params = nlohmann::json::object());
  // Same field multiplied by c; exact when c is a power of two.
  BoundaryField scaled(double c) const;
};

// Named data attached to `s`. Angles are measured about the surface center.
//   zero
//   harmonic-cubic         {"scale"}:  scale * grad(x1^3 - 3 x1 x2^2) . n
//   sin-m-theta            {"lambda", "m"}: lambda * sin(m theta), d = 2
//   spherical-harmonic-11  {"lambda"}: lambda * (x1 - c1) / |x - c|
//   sin9cos9               {"A"}: A * ((x1 - c1) / |x - c|)^9
BoundaryField builtin_field(std::string const& name, nlohmann::json const& params, Surface const& s);

// Nearest-neighbour lookup in a CSV of rows x_1..x_d,value (header optional).
BoundaryField tabulated_field(std::filesystem::path const& csv, int dim);

// Either {"builtin": name, ...params} or {"table": path}.
BoundaryField field_from_json(nlohmann::json const& spec, Surface const& s);

// Domain tree plus boundary flux b_1 (index 0) and interface jumps b_i,
// where b_i = sigma_parent d_n u(outside) - sigma_i d_n u(inside).
struct InterfaceProblem {
  DomainTree tree;
  std::vector<BoundaryField> data;

  int size() const { return tree.size(); }
  int dim() const { return tree.dim(); }

  // Structure, sizes, and sigma_1 > 0.
  void check() const;
};

// Truncation weight w_i = 1 - delta_{iM} / 2.
inline double truncation_weight(int i, int steps) { return i == steps ? 0.5 : 1.0; }

// Coefficients of the unit-diagonal charge-density system
//   gamma_i - alpha_i sum_j K*_{ij} gamma_j = beta_i.
struct CoefficientSet {
  std::vector<double> alpha;
  std::vector<double> beta_scale;  // beta_i = beta_scale[i] * b_i
  double alpha_l1 = 0.0;

  int size() const { return static_cast<int>(alpha.size()); }
  double beta(int i, Vec const& x, Vec const& n, InterfaceProblem const& p) const {
    return beta_scale[static_cast<std::size_t>(i)] * p.data[static_cast<std::size_t>(i)](x, n);
  }
};

// Throws DegenerateError when sigma_parent + sigma_i == 0.
CoefficientSet build_coefficients(InterfaceProblem const& p);

// Interface schedule H_0..H_M: H_0 uniform, H_i (i >= 1) drawn with |alpha_n| / ||alpha||_1.
class SchedulePdf {
 public:
  // Throws DegenerateError when every alpha is zero.
  explicit SchedulePdf(CoefficientSet const& c);

  int size() const { return static_cast<int>(step_prob_.size()); }
  double initial(int n) const { (void)n; return 1.0 / size(); }
  double step(int n) const { return step_prob_[static_cast<std::size_t>(n)]; }

  std::vector<int> sample(int steps, RandomStream& rng) const;

 private:
  std::vector<double> step_prob_;
  std::vector<double> step_cdf_;
};

inline std::vector<int> sample_schedule(CoefficientSet const& c, int steps, RandomStream& rng) {
  return SchedulePdf(c).sample(steps, rng);
}

struct CompatibilityEntry {
  int surface = 0;
  double integral = 0.0;
  double standard_error = 0.0;
  bool flagged = false;  // |integral| > 4 standard errors
};

// Monte Carlo estimate of the integral of b_i over each surface.
std::vector<CompatibilityEntry> check_compatibility(InterfaceProblem const& p, int n_samples,
                                                    std::uint64_t seed = 0);

}  // namespace woi
