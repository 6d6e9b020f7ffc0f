#pragma once

#include "woi/common.hpp"
#include "woi/kernels.hpp"
#include "woi/rng.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace woi {

// Half-line origin + t * direction, t > 0. The direction must be a unit vector.
struct Ray {
  Vec origin;
  Vec direction;

  Ray(Vec origin_, Vec direction_);
};

// A point on a surface together with the outward unit normal there.
struct SurfacePoint {
  Vec x;
  Vec n;
};

struct SurfaceSample {
  SurfacePoint point;
  double pdf = 0.0;  // density with respect to surface area
};

struct Crossing {
  double t = 0.0;
  Vec point;
  bool tangent = false;  // grazing contact; not a transversal crossing
};

// Self-intersection guard when casting from a point on the surface.
inline constexpr double kRayEpsilon = 1e-9;

// Maximum implicit residual for a point to count as lying on a surface.
inline constexpr double kOnSurfaceTolerance = 1e-7;

// Closed C^2 hypersurface in R^d bounding a region. The implicit function
// F = residual() is negative inside, zero on the surface, positive outside.
//
// Implementations are immutable after construction and safe to share across
// threads; all randomness comes from the caller's stream.
class Surface {
 public:
  virtual ~Surface() = default;

  virtual std::string_view kind() const = 0;
  virtual int dim() const = 0;

  // (d-1)-dimensional measure.
  virtual double area() const = 0;

  // Dimensionless implicit residual.
  virtual double residual(Vec const& y) const = 0;

  // Outward unit normal; throws GeometryError if y is not on the surface.
  Vec normal(Vec const& y) const;

  // Area-uniform sample; pdf is 1 / area().
  virtual SurfaceSample sample_uniform(RandomStream& rng) const = 0;

  // Area-preserving involution of the surface, used to build antithetic pairs.
  virtual SurfacePoint reflect(SurfacePoint const& p) const = 0;

  // All crossings with t > kRayEpsilon, sorted ascending.
  std::vector<Crossing> intersect(Ray const& ray) const;

  // Every contact of the full line origin + t * direction, any sign of t,
  // sorted ascending. Grazing contacts are flagged, not dropped.
  virtual std::vector<Crossing> line_roots(Vec const& origin, Vec const& direction) const = 0;

  // Strictly inside.
  virtual bool contains(Vec const& x) const = 0;

  // Distance to the surface; exact for spheres, first order elsewhere.
  virtual double distance(Vec const& x) const = 0;

  virtual Vec center() const = 0;

  // Radius of a ball about center() enclosing the surface.
  virtual double bounding_radius() const = 0;

 protected:
  // Unnormalized outward gradient of the implicit function.
  virtual Vec gradient(Vec const& y) const = 0;
};

using SurfacePtr = std::shared_ptr<Surface const>;

class Sphere final : public Surface {
 public:
  Sphere(Vec center, double radius);

  std::string_view kind() const override { return "sphere"; }
  int dim() const override { return static_cast<int>(center_.size()); }
  double area() const override { return area_; }
  double residual(Vec const& y) const override;
  SurfaceSample sample_uniform(RandomStream& rng) const override;
  SurfacePoint reflect(SurfacePoint const& p) const override;
  std::vector<Crossing> line_roots(Vec const& origin, Vec const& direction) const override;
  bool contains(Vec const& x) const override;
  double distance(Vec const& x) const override;
  Vec center() const override { return center_; }
  double bounding_radius() const override { return radius_; }

  double radius() const { return radius_; }

 protected:
  Vec gradient(Vec const& y) const override { return y - center_; }

 private:
  Vec center_;
  double radius_;
  double area_;
};

// {y : (y - c)^T A (y - c) = 1} with A symmetric positive definite.
class Ellipsoid final : public Surface {
 public:
  Ellipsoid(Vec center, Eigen::MatrixXd form);

  std::string_view kind() const override { return "ellipsoid"; }
  int dim() const override { return static_cast<int>(center_.size()); }
  double area() const override { return area_; }
  double residual(Vec const& y) const override;
  SurfaceSample sample_uniform(RandomStream& rng) const override;
  SurfacePoint reflect(SurfacePoint const& p) const override;
  std::vector<Crossing> line_roots(Vec const& origin, Vec const& direction) const override;
  bool contains(Vec const& x) const override;
  double distance(Vec const& x) const override;
  Vec center() const override { return center_; }
  double bounding_radius() const override { return max_semi_axis_; }

  Eigen::MatrixXd const& form() const { return form_; }

 protected:
  Vec gradient(Vec const& y) const override;

 private:
  Vec center_;
  Eigen::MatrixXd form_;
  Eigen::MatrixXd chol_lower_;    // A = L L^T
  Eigen::MatrixXd sphere_to_surface_;  // L^{-T}
  double max_stretch_ = 0.0;     // sup over unit u of |L u|
  double max_semi_axis_ = 0.0;
  double area_ = 0.0;
};

// Star-shaped closed curve r(theta) = R + a cos(k (theta - rotation)) about a center.
class StarCurve2D final : public Surface {
 public:
  StarCurve2D(Vec center, double base_radius, double amplitude, int lobes, double rotation = 0.0);

  std::string_view kind() const override { return "star2d"; }
  int dim() const override { return 2; }
  double area() const override { return perimeter_; }
  double residual(Vec const& y) const override;
  SurfaceSample sample_uniform(RandomStream& rng) const override;
  SurfacePoint reflect(SurfacePoint const& p) const override;
  std::vector<Crossing> line_roots(Vec const& origin, Vec const& direction) const override;
  bool contains(Vec const& x) const override;
  double distance(Vec const& x) const override;
  Vec center() const override { return center_; }
  double bounding_radius() const override { return base_radius_ + std::abs(amplitude_); }

  double base_radius() const { return base_radius_; }
  double amplitude() const { return amplitude_; }
  int lobes() const { return lobes_; }
  double rotation() const { return rotation_; }

  double polar_radius(double theta) const;
  double polar_radius_derivative(double theta) const;
  // Arc-length speed |dy/dtheta|.
  double speed(double theta) const;
  Vec point_at(double theta) const;

  // Angular brackets used to enumerate line crossings.
  int bracket_count() const { return std::max(4 * lobes_ * 64, 256); }

 protected:
  Vec gradient(Vec const& y) const override;

 private:
  Vec center_;
  double base_radius_;
  double amplitude_;
  int lobes_;
  double rotation_;
  double perimeter_ = 0.0;
  double max_speed_ = 0.0;
};

// Crossings of the full line through `origin` along +/- direction, excluding
// |t| <= kRayEpsilon and tangent contacts. Used by ray-cast transitions.
std::vector<Crossing> line_crossings(Surface const& s, Vec const& origin, Vec const& direction);

// Nested regions with piecewise-constant conductivity. Index 0 is the outer
// boundary; parent[0] == -1 and every other region names its enclosing region.
struct DomainTree {
  std::vector<SurfacePtr> surfaces;
  std::vector<int> parent;
  std::vector<double> sigma;

  int size() const { return static_cast<int>(surfaces.size()); }
  int dim() const { return surfaces.empty() ? 0 : surfaces.front()->dim(); }
  Surface const& surface(int i) const { return *surfaces[static_cast<std::size_t>(i)]; }

  // Diameter of the ball enclosing the outer boundary.
  double diameter() const { return 2.0 * surfaces.front()->bounding_radius(); }

  // Throws TreeError when sizes disagree, dimensions mix, sigma is negative,
  // or parent does not form a tree rooted at 0.
  void check_structure() const;

  std::vector<int> children(int i) const;
};

struct TreeViolation {
  int surface = 0;  // 1-based, as in domain documents
  int probe = 0;
  std::string reason;
};

struct TreeValidation {
  std::vector<TreeViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Structural check plus sampled containment: each surface must lie inside its
// parent and outside every sibling.
TreeValidation validate_tree(DomainTree const& tree, int n_probe, std::uint64_t seed = 0);

}  // namespace woi
