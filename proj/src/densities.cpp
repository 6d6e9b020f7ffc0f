#include "woi/densities.hpp"

#include "woi/domain_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace woi {

BoundaryField BoundaryField::zero() { return {}; }

BoundaryField BoundaryField::custom(std::string name, std::function<double(Vec const&, Vec const&)> fn,
                                    nlohmann::json params) {
  BoundaryField f;
  f.eval = std::move(fn);
  f.name = std::move(name);
  f.params = std::move(params);
  f.identically_zero = false;
  return f;
}

BoundaryField BoundaryField::scaled(double c) const {
  if (identically_zero || c == 0.0) return zero();
  BoundaryField out = *this;
  out.eval = [inner = eval, c](Vec const& x, Vec const& n) { return c * inner(x, n); };
  out.params["scaled_by"] = c;
  return out;
}

namespace {

double param(nlohmann::json const& p, char const* key, std::string const& name) {
  if (!p.contains(key) || !p.at(key).is_number()) {
    throw ConfigError("boundary data \"" + name + "\" needs numeric \"" + key + "\"");
  }
  return p.at(key).get<double>();
}

}  // namespace

BoundaryField builtin_field(std::string const& name, nlohmann::json const& params, Surface const& s) {
  Vec const c = s.center();
  int const d = s.dim();
  if (name == "zero") {
    require_known_keys(params, {}, "boundary data zero");
    return BoundaryField::zero();
  }
  if (name == "harmonic-cubic") {
    require_known_keys(params, {"scale"}, "boundary data harmonic-cubic");
    double const scale = params.contains("scale") ? param(params, "scale", name) : 1.0;
    return BoundaryField::custom(name, [scale](Vec const& x, Vec const& n) {
      double const g1 = 3.0 * x[0] * x[0] - 3.0 * x[1] * x[1];
      double const g2 = -6.0 * x[0] * x[1];
      return scale * (g1 * n[0] + g2 * n[1]);
    }, params);
  }
  if (name == "sin-m-theta") {
    require_known_keys(params, {"lambda", "m"}, "boundary data sin-m-theta");
    if (d != 2) throw ConfigError("sin-m-theta requires d = 2");
    double const lambda = param(params, "lambda", name);
    double const m = param(params, "m", name);
    return BoundaryField::custom(name, [lambda, m, c](Vec const& x, Vec const&) {
      return lambda * std::sin(m * std::atan2(x[1] - c[1], x[0] - c[0]));
    }, params);
  }
  if (name == "spherical-harmonic-11") {
    require_known_keys(params, {"lambda"}, "boundary data spherical-harmonic-11");
    double const lambda = param(params, "lambda", name);
    return BoundaryField::custom(name, [lambda, c](Vec const& x, Vec const&) {
      return lambda * (x[0] - c[0]) / (x - c).norm();
    }, params);
  }
  if (name == "sin9cos9") {
    require_known_keys(params, {"A"}, "boundary data sin9cos9");
    double const amp = param(params, "A", name);
    return BoundaryField::custom(name, [amp, c](Vec const& x, Vec const&) {
      return amp * std::pow((x[0] - c[0]) / (x - c).norm(), 9);
    }, params);
  }
  throw ConfigError("unknown boundary data \"" + name + "\"");
}

BoundaryField tabulated_field(std::filesystem::path const& csv, int dim) {
  std::ifstream in(csv);
  if (!in) throw ConfigError("cannot open boundary table " + csv.string());
  std::vector<double> coords;
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::vector<double> fields;
    double v = 0.0;
    while (row >> v) fields.push_back(v);
    if (!row.eof()) {
      if (line_no == 1) continue;  // header
      throw ConfigError(csv.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (static_cast<int>(fields.size()) != dim + 1) {
      throw ConfigError(csv.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim + 1) +
                        " columns");
    }
    coords.insert(coords.end(), fields.begin(), fields.end() - 1);
    values.push_back(fields.back());
  }
  if (values.empty()) throw ConfigError("boundary table " + csv.string() + " has no rows");
  nlohmann::json params = {{"table", csv.string()}, {"rows", values.size()}};
  return BoundaryField::custom("table", [coords = std::move(coords), values = std::move(values), dim](
                                            Vec const& x, Vec const&) {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::max();
    for (std::size_t r = 0; r < values.size(); ++r) {
      double d2 = 0.0;
      for (int k = 0; k < dim; ++k) {
        double const t = coords[r * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)] - x[k];
        d2 += t * t;
      }
      if (d2 < best_d2) {
        best_d2 = d2;
        best = r;
      }
    }
    return values[best];
  }, params);
}

BoundaryField field_from_json(nlohmann::json const& spec, Surface const& s) {
  if (spec.is_string()) return builtin_field(spec.get<std::string>(), nlohmann::json::object(), s);
  if (!spec.is_object()) throw ConfigError("boundary data must be a name or an object");
  if (spec.contains("table")) {
    require_known_keys(spec, {"table"}, "boundary data");
    if (!spec.at("table").is_string()) throw ConfigError("boundary data \"table\" must be a path");
    return tabulated_field(spec.at("table").get<std::string>(), s.dim());
  }
  if (!spec.contains("builtin") || !spec.at("builtin").is_string()) {
    throw ConfigError("boundary data needs \"builtin\" or \"table\"");
  }
  nlohmann::json params = spec;
  params.erase("builtin");
  return builtin_field(spec.at("builtin").get<std::string>(), params, s);
}

void InterfaceProblem::check() const {
  tree.check_structure();
  if (static_cast<int>(data.size()) != tree.size()) throw ConfigError("one boundary field per surface is required");
  if (!(tree.sigma[0] > 0.0)) throw DegenerateError("sigma_1 must be positive");
}

CoefficientSet build_coefficients(InterfaceProblem const& p) {
  p.check();
  int const n = p.size();
  CoefficientSet c;
  c.alpha.resize(static_cast<std::size_t>(n));
  c.beta_scale.resize(static_cast<std::size_t>(n));
  c.alpha[0] = 2.0;
  c.beta_scale[0] = 2.0 / p.tree.sigma[0];
  for (int i = 1; i < n; ++i) {
    double const si = p.tree.sigma[static_cast<std::size_t>(i)];
    double const sp = p.tree.sigma[static_cast<std::size_t>(p.tree.parent[static_cast<std::size_t>(i)])];
    double const sum = sp + si;
    if (sum == 0.0) throw DegenerateError("surface " + std::to_string(i + 1) + " has sigma_parent + sigma_i = 0");
    c.alpha[static_cast<std::size_t>(i)] = 2.0 * (si - sp) / sum;
    c.beta_scale[static_cast<std::size_t>(i)] = -2.0 / sum;
  }
  for (double a : c.alpha) c.alpha_l1 += std::abs(a);
  return c;
}

SchedulePdf::SchedulePdf(CoefficientSet const& c) {
  if (c.size() == 0) throw DegenerateError("empty coefficient set");
  if (!(c.alpha_l1 > 0.0)) throw DegenerateError("all alpha_i vanish; the schedule is undefined");
  double acc = 0.0;
  for (double a : c.alpha) {
    step_prob_.push_back(std::abs(a) / c.alpha_l1);
    acc += step_prob_.back();
    step_cdf_.push_back(acc);
  }
  step_cdf_.back() = 1.0;
}

std::vector<int> SchedulePdf::sample(int steps, RandomStream& rng) const {
  if (steps < 0) throw Error("negative step count");
  std::vector<int> h(static_cast<std::size_t>(steps) + 1);
  h[0] = static_cast<int>(rng.below(static_cast<std::uint64_t>(size())));
  for (int i = 1; i <= steps; ++i) {
    double const u = rng.uniform();
    // Zero-probability entries have a flat CDF and are never selected.
    auto const it = std::upper_bound(step_cdf_.begin(), step_cdf_.end(), u);
    h[static_cast<std::size_t>(i)] = static_cast<int>(it - step_cdf_.begin());
  }
  return h;
}

std::vector<CompatibilityEntry> check_compatibility(InterfaceProblem const& p, int n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw Error("check_compatibility needs at least two samples");
  std::vector<CompatibilityEntry> out;
  for (int i = 0; i < p.size(); ++i) {
    Surface const& s = p.tree.surface(i);
    RandomStream rng(seed, stream_id(StreamTag::kMisc, 0xC0FFEE, static_cast<std::uint64_t>(i)));
    double mean = 0.0;
    double m2 = 0.0;
    for (int k = 0; k < n_samples; ++k) {
      auto const sample = s.sample_uniform(rng);
      double const v = p.data[static_cast<std::size_t>(i)](sample.point.x, sample.point.n);
      double const delta = v - mean;
      mean += delta / (k + 1);
      m2 += delta * (v - mean);
    }
    double const area = s.area();
    CompatibilityEntry e;
    e.surface = i;
    e.integral = area * mean;
    e.standard_error = area * std::sqrt(m2 / (n_samples - 1) / n_samples);
    e.flagged = std::abs(e.integral) > 4.0 * e.standard_error;
    out.push_back(e);
  }
  return out;
}

}  // namespace woi
