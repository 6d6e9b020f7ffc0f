#include "woi/app.hpp"

#include "woi/domain_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

namespace woi {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t as_count(json const& v, std::string const& key) {
  if (!v.is_number()) throw ConfigError("\"" + key + "\" must be a number");
  double const d = v.get<double>();
  if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19) throw ConfigError("\"" + key + "\" must be a non-negative integer");
  return static_cast<std::uint64_t>(d);
}

int as_int(json const& v, std::string const& key) {
  std::uint64_t const c = as_count(v, key);
  if (c > 1u << 30) throw ConfigError("\"" + key + "\" is too large");
  return static_cast<int>(c);
}

std::string as_string(json const& v, std::string const& key) {
  if (!v.is_string()) throw ConfigError("\"" + key + "\" must be a string");
  return v.get<std::string>();
}

bool as_bool(json const& v, std::string const& key) {
  if (!v.is_boolean()) throw ConfigError("\"" + key + "\" must be true or false");
  return v.get<bool>();
}

Vec as_vec(json const& v, std::string const& key) {
  if (!v.is_array() || v.empty() || v.size() > static_cast<std::size_t>(kMaxDim)) {
    throw ConfigError("\"" + key + "\" must be a non-empty array of numbers");
  }
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) throw ConfigError("\"" + key + "\" must be a non-empty array of numbers");
    out[static_cast<Eigen::Index>(k)] = v[k].get<double>();
  }
  return out;
}

json vec_json(Vec const& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

fs::path resolve(fs::path const& base, fs::path const& p) { return p.is_absolute() ? p : base / p; }

QueryConfig parse_queries(json const& q) {
  if (!q.is_object()) throw ConfigError("\"queries\" must be an object");
  require_known_keys(q, {"kind", "center", "radius", "n_radial", "n_angular", "n_polar", "surface", "count", "file"},
                     "queries");
  QueryConfig out;
  if (q.contains("kind")) out.kind = as_string(q["kind"], "queries.kind");
  if (out.kind != "default" && out.kind != "polar-grid" && out.kind != "random-interior" &&
      out.kind != "surface-grid" && out.kind != "points") {
    throw ConfigError("unknown query kind \"" + out.kind + "\"");
  }
  if (q.contains("center")) out.center = as_vec(q["center"], "queries.center");
  if (q.contains("radius")) {
    if (!q["radius"].is_number() || !(q["radius"].get<double>() > 0.0)) {
      throw ConfigError("\"queries.radius\" must be positive");
    }
    out.radius = q["radius"].get<double>();
  }
  if (q.contains("n_radial")) out.n_radial = as_int(q["n_radial"], "queries.n_radial");
  if (q.contains("n_angular")) out.n_angular = as_int(q["n_angular"], "queries.n_angular");
  if (q.contains("n_polar")) out.n_polar = as_int(q["n_polar"], "queries.n_polar");
  if (q.contains("surface")) out.surface = as_int(q["surface"], "queries.surface");
  if (q.contains("count")) out.count = as_count(q["count"], "queries.count");
  if (q.contains("file")) out.file = as_string(q["file"], "queries.file");
  if (out.kind == "points" && out.file.empty()) throw ConfigError("\"points\" queries need a file");
  return out;
}

std::vector<Vec> read_points(fs::path const& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open query file " + path.string());
  std::vector<Vec> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      double const v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (out.empty()) continue;  // header
      throw ConfigError("non-numeric row in " + path.string());
    }
    if (static_cast<int>(row.size()) < dim) throw ConfigError("short row in " + path.string());
    Vec x(dim);
    for (int k = 0; k < dim; ++k) x[k] = row[static_cast<std::size_t>(k)];
    out.push_back(x);
  }
  return out;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_json(fs::path const& path, json const& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

std::ofstream open_csv(fs::path const& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<double> truth_values(Benchmark const& b, std::span<Vec const> q) {
  std::vector<double> t;
  t.reserve(q.size());
  for (auto const& x : q) t.push_back(b.truth(x));
  return t;
}

// Relative L2 of values (reference aligned) and, when present, of gradients
// away from the surfaces.
json error_block(Benchmark const& b, EstimateReport const& r, Vec const& x_ref) {
  json e = json::object();
  if (!b.truth || r.queries.empty()) return e;
  auto const t = truth_values(b, r.queries);
  L2Error const v = l2_error(r.queries, r.estimate, t, x_ref);
  e["l2"] = v.l2;
  e["relative_l2"] = v.relative;
  e["x_ref"] = vec_json(x_ref);
  if (!r.gradient.empty() && b.truth_gradient) {
    std::vector<double> est;
    std::vector<double> ref;
    for (std::size_t j = 0; j < r.queries.size(); ++j) {
      if (r.near_surface[j]) continue;
      Vec const g = b.truth_gradient(r.queries[j]);
      for (int k = 0; k < r.dim; ++k) {
        est.push_back(r.gradient[j * static_cast<std::size_t>(r.dim) + static_cast<std::size_t>(k)]);
        ref.push_back(g[k]);
      }
    }
    if (!ref.empty()) {
      L2Error const g = gradient_l2_error(est, ref);
      e["gradient_l2"] = g.l2;
      e["gradient_relative_l2"] = g.relative;
    }
  }
  return e;
}

Vec reference_point(RunConfig const& cfg, Benchmark const& b, std::span<Vec const> q) {
  if (cfg.x_ref) return *cfg.x_ref;
  if (b.x_ref) return *b.x_ref;
  if (q.empty()) throw ConfigError("no query points to take x_ref from");
  return q.front();
}

}  // namespace

json RunConfig::to_json() const {
  json j;
  if (!benchmark.empty()) j["benchmark"] = benchmark;
  if (benchmark == "example2") j["dim"] = benchmark_dim;
  if (problem) j["problem"] = *problem;
  j["estimator"] = to_string(estimator.variant);
  j["walkers"] = estimator.walkers;
  if (steps_set) j["steps"] = estimator.steps;
  j["schedules"] = estimator.schedules;
  j["traversals"] = estimator.traversals;
  if (transition_set) j["transition"] = to_string(estimator.transition);
  j["coupling"] = to_string(estimator.coupling);
  j["seed"] = estimator.seed;
  j["threads"] = estimator.threads;
  j["gradient"] = estimator.gradient;
  json q = {{"kind", queries.kind}, {"n_radial", queries.n_radial}, {"n_angular", queries.n_angular},
            {"n_polar", queries.n_polar}, {"surface", queries.surface}, {"count", queries.count}};
  if (queries.center) q["center"] = vec_json(*queries.center);
  if (queries.radius) q["radius"] = *queries.radius;
  if (!queries.file.empty()) q["file"] = queries.file.string();
  j["queries"] = q;
  if (x_ref) j["x_ref"] = vec_json(*x_ref);
  j["out"] = out_dir.string();
  if (!convergence.empty()) j["convergence"] = convergence;
  j["emit_training"] = emit_training;
  j["training"] = {{"interior", training.interior}, {"boundary", training.boundary}};
  return j;
}

RunConfig parse_run_config(json const& doc, fs::path const& base_dir) {
  if (!doc.is_object()) throw ConfigError("run config must be a JSON object");
  require_known_keys(doc,
                     {"benchmark", "dim", "problem", "estimator", "walkers", "steps", "schedules", "traversals",
                      "transition", "coupling", "seed", "threads", "gradient", "queries", "x_ref", "out",
                      "convergence", "emit_training", "training"},
                     "run config");
  RunConfig c;
  c.base_dir = base_dir;
  if (doc.contains("benchmark")) c.benchmark = as_string(doc["benchmark"], "benchmark");
  if (doc.contains("dim")) c.benchmark_dim = as_int(doc["dim"], "dim");
  if (doc.contains("problem")) {
    json const& p = doc["problem"];
    if (!p.is_object()) throw ConfigError("\"problem\" must be an object");
    require_known_keys(p, {"domain", "data"}, "problem");
    if (!p.contains("domain") || !p.contains("data")) throw ConfigError("\"problem\" needs \"domain\" and \"data\"");
    c.problem = p;
  }
  if (c.benchmark.empty() == !c.problem.has_value()) {
    throw ConfigError("exactly one of \"benchmark\" and \"problem\" is required");
  }
  auto& e = c.estimator;
  if (doc.contains("estimator")) e.variant = parse_variant(as_string(doc["estimator"], "estimator"));
  if (doc.contains("walkers")) e.walkers = as_count(doc["walkers"], "walkers");
  if (doc.contains("steps")) {
    e.steps = as_int(doc["steps"], "steps");
    c.steps_set = true;
  }
  if (doc.contains("schedules")) e.schedules = as_count(doc["schedules"], "schedules");
  if (doc.contains("traversals")) e.traversals = as_count(doc["traversals"], "traversals");
  if (doc.contains("transition")) {
    e.transition = parse_transition(as_string(doc["transition"], "transition"));
    c.transition_set = true;
  }
  if (doc.contains("coupling")) e.coupling = parse_coupling(as_string(doc["coupling"], "coupling"));
  if (doc.contains("seed")) e.seed = as_count(doc["seed"], "seed");
  if (doc.contains("threads")) e.threads = as_int(doc["threads"], "threads");
  if (doc.contains("gradient")) e.gradient = as_bool(doc["gradient"], "gradient");
  if (doc.contains("queries")) c.queries = parse_queries(doc["queries"]);
  if (doc.contains("x_ref")) c.x_ref = as_vec(doc["x_ref"], "x_ref");
  if (doc.contains("out")) c.out_dir = as_string(doc["out"], "out");
  if (doc.contains("convergence")) {
    json const& l = doc["convergence"];
    if (!l.is_array()) throw ConfigError("\"convergence\" must be an array of walker counts");
    for (auto const& w : l) c.convergence.push_back(as_count(w, "convergence"));
  }
  if (doc.contains("emit_training")) c.emit_training = as_bool(doc["emit_training"], "emit_training");
  if (doc.contains("training")) {
    json const& t = doc["training"];
    if (!t.is_object()) throw ConfigError("\"training\" must be an object");
    require_known_keys(t, {"interior", "boundary"}, "training");
    if (t.contains("interior")) c.training.interior = as_count(t["interior"], "training.interior");
    if (t.contains("boundary")) c.training.boundary = as_count(t["boundary"], "training.boundary");
  }
  e.validate();
  return c;
}

RunConfig load_run_config(fs::path const& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (json::exception const& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  }
  return parse_run_config(doc, path.has_parent_path() ? path.parent_path() : fs::path("."));
}

Benchmark resolve_benchmark(RunConfig const& cfg) {
  if (!cfg.benchmark.empty()) return make_benchmark(cfg.benchmark, cfg.benchmark_dim);
  json const& p = *cfg.problem;
  Benchmark b;
  b.name = "custom";
  b.problem.tree = p["domain"].is_string() ? load_domain(resolve(cfg.base_dir, as_string(p["domain"], "domain")))
                                           : domain_from_json(p["domain"]);
  json const& data = p["data"];
  if (!data.is_array() || static_cast<int>(data.size()) != b.problem.tree.size()) {
    throw ConfigError("\"problem.data\" needs one field per surface");
  }
  for (int i = 0; i < b.problem.tree.size(); ++i) {
    json spec = data[static_cast<std::size_t>(i)];
    if (spec.is_object() && spec.contains("table") && spec["table"].is_string()) {
      spec["table"] = resolve(cfg.base_dir, spec["table"].get<std::string>()).string();
    }
    try {
      b.problem.data.push_back(field_from_json(spec, b.problem.tree.surface(i)));
    } catch (GeometryError const& ex) {
      throw ConfigError(ex.what());
    }
  }
  b.problem.check();
  b.queries.kind = QueryKind::kRandomInterior;
  return b;
}

EstimatorConfig resolve_estimator(RunConfig const& cfg, Benchmark const& b) {
  EstimatorConfig e = cfg.estimator;
  if (!cfg.steps_set) e.steps = b.steps;
  if (!cfg.transition_set) e.transition = b.transition;
  e.validate();
  return e;
}

std::vector<Vec> resolve_queries(RunConfig const& cfg, Benchmark const& b) {
  QueryConfig const& q = cfg.queries;
  Surface const& outer = b.problem.tree.surface(0);
  std::uint64_t const seed = cfg.estimator.seed;
  if (q.kind == "default") return make_queries(b, seed);
  if (q.kind == "polar-grid") {
    return polar_grid(q.center.value_or(outer.center()), q.radius.value_or(outer.bounding_radius()), q.n_radial,
                      q.n_angular);
  }
  if (q.kind == "random-interior") return random_interior(outer, q.count, seed);
  if (q.kind == "surface-grid") {
    if (q.surface < 1 || q.surface > b.problem.tree.size()) throw ConfigError("queries.surface out of range");
    auto const* s = dynamic_cast<Sphere const*>(&b.problem.tree.surface(q.surface - 1));
    if (s == nullptr) throw ConfigError("surface-grid queries need a spherical surface");
    return sphere_grid(*s, q.n_angular, q.n_polar);
  }
  return read_points(resolve(cfg.base_dir, q.file), b.problem.dim());
}

void write_solution_csv(fs::path const& path, EstimateReport const& r) {
  auto out = open_csv(path);
  int const d = r.dim;
  bool const grad = !r.gradient.empty();
  for (int k = 0; k < d; ++k) out << 'x' << k + 1 << ',';
  out << "estimate,";
  if (grad) {
    for (int k = 0; k < d; ++k) out << "grad_" << k + 1 << ',';
  }
  out << "variance,ci_halfwidth\n";
  for (std::size_t j = 0; j < r.queries.size(); ++j) {
    for (int k = 0; k < d; ++k) out << fmt17(r.queries[j][k]) << ',';
    out << fmt17(r.estimate[j]) << ',';
    if (grad) {
      for (int k = 0; k < d; ++k) {
        out << fmt17(r.gradient[j * static_cast<std::size_t>(d) + static_cast<std::size_t>(k)]) << ',';
      }
    }
    out << fmt17(r.variance[j]) << ',' << fmt17(r.ci_halfwidth[j]) << '\n';
  }
}

json report_to_json(EstimateReport const& r) {
  json j;
  j["estimator"] = to_string(r.variant);
  j["seed"] = r.seed;
  j["walkers"] = r.walkers;
  j["schedules"] = r.schedules;
  j["effective_samples"] = r.effective_samples;
  j["steps"] = r.steps;
  j["threads"] = r.threads;
  j["wall_seconds"] = r.wall_seconds;
  j["queries"] = r.queries.size();
  auto const& d = r.diagnostics;
  j["diagnostics"] = {{"ray_retries", d.ray_retries},
                      {"aborted_walkers", d.aborted_walkers},
                      {"resampled_walkers", d.resampled_walkers},
                      {"raycast_fallbacks", d.raycast_fallbacks},
                      {"near_surface_queries", d.near_surface_queries}};
  return j;
}

double fit_log_slope(std::span<std::uint64_t const> walkers, std::span<double const> errors) {
  if (walkers.size() != errors.size() || walkers.size() < 2) throw Error("fit_log_slope needs two or more points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  double const n = static_cast<double>(walkers.size());
  for (std::size_t k = 0; k < walkers.size(); ++k) {
    double const x = std::log(static_cast<double>(walkers[k]));
    double const y = std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double const den = n * sxx - sx * sx;
  if (den == 0.0) throw Error("fit_log_slope: walker counts must differ");
  return (n * sxy - sx * sy) / den;
}

json ntd_map(RunConfig const& cfg, Benchmark const& b, fs::path const& csv) {
  int const surface = cfg.queries.surface;
  if (surface < 1 || surface > b.problem.tree.size()) throw ConfigError("queries.surface out of range");
  auto const* s = dynamic_cast<Sphere const*>(&b.problem.tree.surface(surface - 1));
  if (s == nullptr || s->dim() != 3) throw ConfigError("NtD maps need a sphere in R^3");
  int const nt = cfg.queries.n_angular;
  int const np = cfg.queries.n_polar;
  auto const q = sphere_grid(*s, nt, np);
  EstimatorConfig e = resolve_estimator(cfg, b);
  e.gradient = false;

  auto out = open_csv(csv);
  out << "theta,phi,x1,x2,x3,estimate,variance,ci_halfwidth" << (b.truth ? ",truth" : "") << '\n';
  json j = {{"surface", surface}, {"points", q.size()}};
  if (q.empty()) return j;
  EstimateReport const r = estimate(b.problem, q, e);
  Vec const x_ref = cfg.x_ref.value_or(q.front());
  std::vector<double> t;
  if (b.truth) {
    t = truth_values(b, q);
    L2Error const err = l2_error(q, r.estimate, t, x_ref);
    j["relative_l2"] = err.relative;
    j["l2"] = err.l2;
  }
  for (int jp = 0; jp < np; ++jp) {
    for (int kt = 0; kt < nt; ++kt) {
      std::size_t const idx = static_cast<std::size_t>(jp) * static_cast<std::size_t>(nt) + static_cast<std::size_t>(kt);
      double const theta = 2.0 * std::numbers::pi * kt / nt;
      double const phi = std::numbers::pi * (jp + 0.5) / np;
      out << fmt17(theta) << ',' << fmt17(phi);
      for (int k = 0; k < 3; ++k) out << ',' << fmt17(q[idx][k]);
      out << ',' << fmt17(r.estimate[idx]) << ',' << fmt17(r.variance[idx]) << ',' << fmt17(r.ci_halfwidth[idx]);
      if (b.truth) out << ',' << fmt17(t[idx]);
      out << '\n';
    }
  }
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

json emit_training_set(RunConfig const& cfg, Benchmark const& b, fs::path const& dir) {
  Surface const& outer = b.problem.tree.surface(0);
  int const d = b.problem.dim();
  std::uint64_t const seed = cfg.estimator.seed;

  auto const interior = random_interior(outer, cfg.training.interior, seed);
  EstimatorConfig e = resolve_estimator(cfg, b);
  e.gradient = false;
  std::vector<double> u_hat;
  if (!interior.empty()) u_hat = estimate(b.problem, interior, e).estimate;
  {
    auto out = open_csv(dir / "interior.csv");
    for (int k = 0; k < d; ++k) out << 'x' << k + 1 << ',';
    out << "u_hat\n";
    for (std::size_t j = 0; j < interior.size(); ++j) {
      for (int k = 0; k < d; ++k) out << fmt17(interior[j][k]) << ',';
      out << fmt17(u_hat[j]) << '\n';
    }
  }

  double const sigma1 = b.problem.tree.sigma[0];
  RandomStream rng(seed, stream_id(StreamTag::kQueries, 1));
  {
    auto out = open_csv(dir / "boundary.csv");
    for (int k = 0; k < d; ++k) out << 'x' << k + 1 << ',';
    for (int k = 0; k < d; ++k) out << 'n' << k + 1 << ',';
    out << "b1\n";
    for (std::uint64_t j = 0; j < cfg.training.boundary; ++j) {
      SurfacePoint const p = outer.sample_uniform(rng).point;
      for (int k = 0; k < d; ++k) out << fmt17(p.x[k]) << ',';
      for (int k = 0; k < d; ++k) out << fmt17(p.n[k]) << ',';
      out << fmt17(b.problem.data[0](p.x, p.n) / sigma1) << '\n';
    }
  }
  return {{"interior", interior.size()}, {"boundary", cfg.training.boundary}, {"sigma1", sigma1}};
}

json run(RunConfig const& cfg) {
  Benchmark const b = resolve_benchmark(cfg);
  EstimatorConfig const e = resolve_estimator(cfg, b);
  auto const queries = resolve_queries(cfg, b);
  fs::create_directories(cfg.out_dir);

  json doc;
  doc["config"] = cfg.to_json();
  doc["benchmark"] = b.name;
  doc["transition"] = to_string(e.transition);
  doc["coupling"] = to_string(e.coupling);

  EstimateReport r;
  if (queries.empty()) {
    r.dim = b.problem.dim();
    r.variant = e.variant;
    r.walkers = e.walkers;
    r.steps = e.steps;
    r.seed = e.seed;
    r.threads = e.threads;
  } else {
    r = estimate(b.problem, queries, e);
  }
  write_solution_csv(cfg.out_dir / "solution.csv", r);
  doc.update(report_to_json(r));
  if (b.truth && !queries.empty()) {
    Vec const x_ref = reference_point(cfg, b, queries);
    json const err = error_block(b, r, x_ref);
    doc["errors"] = err;
    doc["relative_l2"] = err.at("relative_l2");
  }

  if (!cfg.convergence.empty()) {
    if (!b.truth) throw ConfigError("convergence studies need a benchmark with a ground truth");
    if (queries.empty()) throw ConfigError("convergence studies need query points");
    Vec const x_ref = reference_point(cfg, b, queries);
    auto const t = truth_values(b, queries);
    json ladder = json::array();
    std::vector<double> errs;
    for (std::uint64_t w : cfg.convergence) {
      EstimatorConfig ew = e;
      ew.walkers = w;
      ew.gradient = false;
      EstimateReport const rw = estimate(b.problem, queries, ew);
      double const rel = l2_error(queries, rw.estimate, t, x_ref).relative;
      errs.push_back(rel);
      ladder.push_back({{"walkers", w}, {"relative_l2", rel}, {"wall_seconds", rw.wall_seconds}});
    }
    doc["convergence"] = {{"ladder", ladder}};
    if (cfg.convergence.size() >= 2) {
      doc["convergence"]["slope"] = fit_log_slope(cfg.convergence, errs);
      doc["slope"] = doc["convergence"]["slope"];
    }
  }

  if (cfg.queries.kind == "surface-grid") doc["ntd"] = ntd_map(cfg, b, cfg.out_dir / "ntd.csv");
  if (cfg.emit_training) doc["training"] = emit_training_set(cfg, b, cfg.out_dir);

  write_json(cfg.out_dir / "report.json", doc);
  return doc;
}

}  // namespace woi
