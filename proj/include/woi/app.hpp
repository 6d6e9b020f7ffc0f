#pragma once

#include "woi/estimators.hpp"
#include "woi/problems.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace woi {

struct QueryConfig {
  // "default" | "polar-grid" | "random-interior" | "surface-grid" | "points"
  std::string kind = "default";
  std::optional<Vec> center;      // polar-grid; defaults to the outer surface center
  std::optional<double> radius;   // polar-grid; defaults to the outer bounding radius
  int n_radial = 40;
  int n_angular = 40;             // polar-grid angles, surface-grid theta count
  int n_polar = 20;               // surface-grid phi count
  int surface = 1;                // surface-grid target, 1-based
  std::uint64_t count = 1000;     // random-interior
  std::filesystem::path file;     // points: CSV of x_1..x_d
};

struct TrainingConfig {
  std::uint64_t interior = 7845;
  std::uint64_t boundary = 500;
};

struct RunConfig {
  std::string benchmark;               // empty when `problem` is given
  int benchmark_dim = 3;               // example2 only
  std::optional<nlohmann::json> problem;  // {"domain": path | object, "data": [field, ...]}
  std::filesystem::path base_dir = ".";   // relative paths resolve against this

  EstimatorConfig estimator;
  bool steps_set = false;       // otherwise the benchmark's recommended M
  bool transition_set = false;  // otherwise the benchmark's recommended mode

  QueryConfig queries;
  std::optional<Vec> x_ref;
  std::filesystem::path out_dir = "woi-out";
  std::vector<std::uint64_t> convergence;
  bool emit_training = false;
  TrainingConfig training;

  nlohmann::json to_json() const;
};

// Strict: unknown keys and ill-typed values raise ConfigError.
RunConfig parse_run_config(nlohmann::json const& doc, std::filesystem::path const& base_dir = ".");
RunConfig load_run_config(std::filesystem::path const& path);

// Benchmark by name, or a custom problem without ground truth.
Benchmark resolve_benchmark(RunConfig const& cfg);
EstimatorConfig resolve_estimator(RunConfig const& cfg, Benchmark const& b);
std::vector<Vec> resolve_queries(RunConfig const& cfg, Benchmark const& b);

// Columns x_1..x_d, estimate[, grad_1..grad_d], variance, ci_halfwidth; 17 significant digits.
void write_solution_csv(std::filesystem::path const& path, EstimateReport const& r);

nlohmann::json report_to_json(EstimateReport const& r);

// Least-squares slope of log(error) against log(W).
double fit_log_slope(std::span<std::uint64_t const> walkers, std::span<double const> errors);

// Writes <out>/solution.csv and <out>/report.json (plus ntd.csv, convergence
// and training files when requested) and returns the report document.
nlohmann::json run(RunConfig const& cfg);

// Surface query grid on sphere `surface` (1-based); rows theta, phi, x_1..x_3,
// estimate, variance, ci_halfwidth[, truth]. Throws ConfigError for non-spheres.
nlohmann::json ntd_map(RunConfig const& cfg, Benchmark const& b, std::filesystem::path const& csv);

// interior.csv: x_1..x_d, u_hat at points inside the outer surface.
// boundary.csv: x_1..x_d, n_1..n_d, b1 with b1 the Neumann flux d_n u = b_1 / sigma_1.
nlohmann::json emit_training_set(RunConfig const& cfg, Benchmark const& b, std::filesystem::path const& dir);

}  // namespace woi
