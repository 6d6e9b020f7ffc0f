#pragma once

#include "woi/densities.hpp"
#include "woi/kernels.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace woi {

enum class Variant { kWob, kNaiveWoi, kWoi, kWoiVr };

// How a walker moves from one surface point to the next.
//   kUniformArea: area-uniform sample on the scheduled surface.
//   kRayCast: same-surface steps follow a random line through the current
//             point; cross-surface steps fall back to kUniformArea.
enum class Transition { kUniformArea, kRayCast };

// How the second chain of a variance-reduced pair is driven.
//   kAntithetic: shared Y_0, every later step mirrored.
//   kAntitheticStart: Y_0 mirrored as well.
//   kIdentical: both chains replay the same variates (degenerate test coupling).
enum class Coupling { kAntithetic, kAntitheticStart, kIdentical };

std::string to_string(Variant v);
std::string to_string(Transition t);
std::string to_string(Coupling c);
Variant parse_variant(std::string const& s);
Transition parse_transition(std::string const& s);
Coupling parse_coupling(std::string const& s);

struct EstimatorConfig {
  Variant variant = Variant::kWoi;
  int steps = 4;                   // M
  std::uint64_t walkers = 100000;  // W, counted in chains; woi-vr uses W/2 pairs
  // S; 0 draws a fresh schedule for every sample.
  std::uint64_t schedules = 0;
  std::uint64_t traversals = 1000;  // naive-woi tree traversals
  Transition transition = Transition::kUniformArea;
  Coupling coupling = Coupling::kAntithetic;
  std::uint64_t seed = 0;
  int threads = 1;
  bool gradient = false;

  void validate() const;
};

struct Diagnostics {
  std::uint64_t ray_retries = 0;         // directions redrawn after a line missed the surface
  std::uint64_t aborted_walkers = 0;     // walks truncated after exhausting ray retries
  std::uint64_t resampled_walkers = 0;   // walkers redrawn after landing on a query point
  std::uint64_t raycast_fallbacks = 0;   // cross-surface steps taken by area sampling in ray-cast mode
  std::uint64_t near_surface_queries = 0;  // gradient queries within delta_grad of a surface

  Diagnostics& operator+=(Diagnostics const& o);
};

struct EstimateReport {
  int dim = 0;
  std::vector<Vec> queries;
  std::vector<double> estimate;
  std::vector<double> variance;       // per-sample variance
  std::vector<double> ci_halfwidth;   // 1.96 sqrt(variance / effective_samples)
  // Row-major [query][component]; empty unless the gradient was requested.
  std::vector<double> gradient;
  std::vector<double> gradient_variance;
  std::vector<double> gradient_ci_halfwidth;
  std::vector<bool> near_surface;     // gradient-only warning flags

  Variant variant = Variant::kWoi;
  std::uint64_t walkers = 0;
  std::uint64_t schedules = 0;
  std::uint64_t effective_samples = 0;
  int steps = 0;
  std::uint64_t seed = 0;
  int threads = 1;
  double wall_seconds = 0.0;
  Diagnostics diagnostics;

  Vec gradient_at(std::size_t j) const;
};

// Naive estimator refuses trees with more than this many leaves per level.
inline constexpr double kNaiveLeafLimit = 1e5;

// Gradient queries closer than this fraction of the domain diameter are flagged.
inline constexpr double kGradientGuardFraction = 1e-3;

// Dispatch on cfg.variant.
EstimateReport estimate(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig const& cfg);

// Single-surface Neumann problem d_n v = b_1 / sigma_1, ray-cast walk.
EstimateReport wob_estimate(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig cfg);
EstimateReport naive_woi_estimate(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig cfg);
EstimateReport woi_estimate(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig cfg);
EstimateReport woi_vr_estimate(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig cfg);
// Same walk with green_gradient in place of green; sets cfg.gradient.
EstimateReport gradient_estimate(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig cfg);

// One transition of a walker from `from` (on surface `from_surface`) to `to_surface`.
struct TransitionResult {
  SurfacePoint point;
  double weight = 0.0;  // multiplies Q: K*(y, y_prev) / p(y_prev, y), or 1/2 for ray casts
  double t_factor = 1.0;  // multiplies T: q * sign((y - y_prev) . n(y)) for ray casts
  bool ray_cast = false;
  bool ok = true;       // false when every ray missed the surface
};

TransitionResult transition_sample(KernelContext const& ctx, DomainTree const& tree, Transition mode,
                                   SurfacePoint const& from, int from_surface, int to_surface, RandomStream& rng,
                                   Diagnostics& diag);

// Per-step weights 2^i T_i Q_i of one WoB walk, before the leading 2 and the
// w_M halving; exposed so tests can check Q_i = Q_0 / 2^i exactly.
struct WobTrace {
  std::vector<SurfacePoint> points;
  std::vector<double> q;
  std::vector<double> t;
  std::vector<double> weight;  // 2 * 2^i * T_i * Q_i for i < M, 2^M * T_M * Q_M at i = M
};
WobTrace wob_trace(InterfaceProblem const& p, EstimatorConfig const& cfg, std::uint64_t walker);

}  // namespace woi
