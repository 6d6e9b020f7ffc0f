#include "engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace woi {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kWob: return "wob";
    case Variant::kNaiveWoi: return "naive-woi";
    case Variant::kWoi: return "woi";
    case Variant::kWoiVr: return "woi-vr";
  }
  return "?";
}

std::string to_string(Transition t) { return t == Transition::kRayCast ? "ray-cast" : "uniform-area"; }

std::string to_string(Coupling c) {
  switch (c) {
    case Coupling::kAntithetic: return "antithetic";
    case Coupling::kAntitheticStart: return "antithetic-start";
    case Coupling::kIdentical: return "identical";
  }
  return "?";
}

Variant parse_variant(std::string const& s) {
  if (s == "wob") return Variant::kWob;
  if (s == "naive-woi") return Variant::kNaiveWoi;
  if (s == "woi") return Variant::kWoi;
  if (s == "woi-vr") return Variant::kWoiVr;
  throw ConfigError("unknown estimator \"" + s + "\" (expected wob, naive-woi, woi or woi-vr)");
}

Transition parse_transition(std::string const& s) {
  if (s == "uniform-area") return Transition::kUniformArea;
  if (s == "ray-cast") return Transition::kRayCast;
  throw ConfigError("unknown transition \"" + s + "\" (expected uniform-area or ray-cast)");
}

Coupling parse_coupling(std::string const& s) {
  if (s == "antithetic") return Coupling::kAntithetic;
  if (s == "antithetic-start") return Coupling::kAntitheticStart;
  if (s == "identical") return Coupling::kIdentical;
  throw ConfigError("unknown coupling \"" + s + "\" (expected antithetic, antithetic-start or identical)");
}

void EstimatorConfig::validate() const {
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (walkers < 1) throw ConfigError("walkers must be >= 1");
  if (schedules > walkers) throw ConfigError("schedules must not exceed walkers");
  if (traversals < 1) throw ConfigError("traversals must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (variant == Variant::kWoiVr && walkers < 2) throw ConfigError("woi-vr needs at least two walkers");
}

Diagnostics& Diagnostics::operator+=(Diagnostics const& o) {
  ray_retries += o.ray_retries;
  aborted_walkers += o.aborted_walkers;
  resampled_walkers += o.resampled_walkers;
  raycast_fallbacks += o.raycast_fallbacks;
  near_surface_queries += o.near_surface_queries;
  return *this;
}

Vec EstimateReport::gradient_at(std::size_t j) const {
  Vec g(dim);
  for (int c = 0; c < dim; ++c) g[c] = gradient[j * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)];
  return g;
}

namespace {

constexpr int kMaxRayRetries = 64;

RandomStream walker_stream(std::uint64_t seed, std::uint64_t sample, std::uint64_t walker, std::uint64_t attempt) {
  return RandomStream(seed, stream_id(StreamTag::kWalker, sample, walker, attempt));
}

RandomStream partner_stream(std::uint64_t seed, std::uint64_t sample, std::uint64_t walker, std::uint64_t attempt) {
  return RandomStream(seed, stream_id(StreamTag::kPartner, sample, walker, attempt));
}

// Line through `from` along `dir`; one crossing chosen uniformly.
TransitionResult ray_step(Surface const& s, SurfacePoint const& from, Vec dir, RandomStream& dir_rng,
                          RandomStream& pick_rng, Diagnostics& diag) {
  TransitionResult r;
  r.ray_cast = true;
  for (int attempt = 0;; ++attempt) {
    auto const crossings = line_crossings(s, from.x, dir);
    if (!crossings.empty()) {
      auto const q = static_cast<std::uint64_t>(crossings.size());
      Crossing const& c = crossings[static_cast<std::size_t>(q == 1 ? 0 : pick_rng.below(q))];
      Vec const n = s.normal(c.point);
      double const orient = (c.point - from.x).dot(n);
      r.point = {c.point, n};
      r.weight = 0.5;
      r.t_factor = static_cast<double>(q) * (orient > 0.0 ? 1.0 : -1.0);
      return r;
    }
    if (attempt == kMaxRayRetries) break;
    ++diag.ray_retries;
    dir = dir_rng.direction(s.dim());
  }
  ++diag.aborted_walkers;
  r.ok = false;
  return r;
}

TransitionResult area_step(KernelContext const& ctx, SurfacePoint const& from,
                           SurfacePoint const& to, double pdf) {
  TransitionResult r;
  r.point = to;
  r.weight = ctx.poincare_kernel(to.x, to.n, from.x) / pdf;
  return r;
}

struct Scheduled {
  KernelContext ctx;
  CoefficientSet coef;
  SchedulePdf pdf;
  EstimatorConfig cfg;
  int n = 0;

  Scheduled(InterfaceProblem const& p, EstimatorConfig const& c)
      : ctx(p.dim()), coef(build_coefficients(p)), pdf(coef), cfg(c), n(p.size()) {}

  std::vector<int> schedule(std::uint64_t sample) const {
    RandomStream rng(cfg.seed, stream_id(StreamTag::kSchedule, sample));
    return pdf.sample(cfg.steps, rng);
  }

  double sign(int h) const { return coef.alpha[static_cast<std::size_t>(h)] > 0.0 ? 1.0 : -1.0; }
};

// Samples for S schedules: one schedule per sample, W/S walkers each.
std::uint64_t sample_count(EstimatorConfig const& cfg, std::uint64_t units) {
  return cfg.schedules == 0 ? units : std::min(cfg.schedules, units);
}

void flag_near_surface(DomainTree const& tree, EstimateReport& r) {
  double const guard = kGradientGuardFraction * tree.diameter();
  r.near_surface.assign(r.queries.size(), false);
  for (std::size_t j = 0; j < r.queries.size(); ++j) {
    for (int i = 0; i < tree.size(); ++i) {
      if (tree.surface(i).distance(r.queries[j]) < guard) {
        r.near_surface[j] = true;
        ++r.diagnostics.near_surface_queries;
        break;
      }
    }
  }
}

EstimateReport run(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig const& cfg,
                   detail::EngineJob job, detail::WalkerFn const& walker) {
  auto const start = std::chrono::steady_clock::now();
  for (auto const& x : queries) {
    if (x.size() != p.dim()) throw ConfigError("query point dimension does not match the problem");
  }
  EstimateReport r;
  r.dim = p.dim();
  r.queries.assign(queries.begin(), queries.end());
  r.variant = cfg.variant;
  r.walkers = cfg.walkers;
  r.schedules = cfg.schedules;
  r.steps = cfg.steps;
  r.seed = cfg.seed;
  r.threads = cfg.threads;
  job.gradient = cfg.gradient;
  job.threads = cfg.threads;

  KernelContext const ctx(p.dim());
  QueryBlock const block(p.dim(), queries);
  detail::Moments const m = detail::run_engine(ctx, block, job, walker, r.diagnostics);
  detail::finish_report(m, queries.size(), p.dim(), cfg.gradient, r);
  if (cfg.gradient) flag_near_surface(p.tree, r);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

TransitionResult transition_sample(KernelContext const& ctx, DomainTree const& tree, Transition mode,
                                   SurfacePoint const& from, int from_surface, int to_surface, RandomStream& rng,
                                   Diagnostics& diag) {
  Surface const& s = tree.surface(to_surface);
  if (mode == Transition::kRayCast) {
    if (to_surface == from_surface) return ray_step(s, from, rng.direction(s.dim()), rng, rng, diag);
    ++diag.raycast_fallbacks;
  }
  auto const smp = s.sample_uniform(rng);
  return area_step(ctx, from, smp.point, smp.pdf);
}

// ---------------------------------------------------------------------------
// WoI: u(x) ~ sum_i w_i N ||alpha||^i prod sign(alpha_H) Q_i T_i Phi(x, Y_i)

EstimateReport woi_estimate(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig cfg) {
  cfg.variant = Variant::kWoi;
  cfg.validate();
  Scheduled const sc(p, cfg);
  detail::EngineJob job{sample_count(cfg, cfg.walkers), cfg.walkers};

  auto walker = [&](std::uint64_t sample, std::uint64_t w, std::uint64_t attempt, std::vector<WeightedSource>& out,
                    Diagnostics& diag) {
    std::vector<int> const h = sc.schedule(sample);
    RandomStream rng = walker_stream(cfg.seed, sample, w, attempt);
    auto const y0 = p.tree.surface(h[0]).sample_uniform(rng);
    double q = sc.coef.beta(h[0], y0.point.x, y0.point.n, p) / y0.pdf;
    if (q == 0.0) return;
    double t = 1.0;
    double scale = sc.n;
    out.push_back({truncation_weight(0, cfg.steps) * scale * q, y0.point.x});
    SurfacePoint cur = y0.point;
    for (int i = 1; i <= cfg.steps; ++i) {
      int const hi = h[static_cast<std::size_t>(i)];
      scale *= sc.coef.alpha_l1 * sc.sign(hi);
      auto const tr = transition_sample(sc.ctx, p.tree, cfg.transition, cur, h[static_cast<std::size_t>(i - 1)], hi,
                                        rng, diag);
      if (!tr.ok) return;
      q *= tr.weight;
      t *= tr.t_factor;
      cur = tr.point;
      out.push_back({truncation_weight(i, cfg.steps) * scale * q * t, cur.x});
    }
  };
  return run(p, queries, cfg, job, walker);
}

// ---------------------------------------------------------------------------
// Variance-reduced WoI: each sample averages a coupled pair of chains.

EstimateReport woi_vr_estimate(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig cfg) {
  cfg.variant = Variant::kWoiVr;
  cfg.validate();
  Scheduled const sc(p, cfg);
  std::uint64_t const pairs = cfg.walkers / 2;
  detail::EngineJob job{sample_count(cfg, pairs), pairs};

  auto walker = [&](std::uint64_t sample, std::uint64_t w, std::uint64_t attempt, std::vector<WeightedSource>& out,
                    Diagnostics& diag) {
    std::vector<int> const h = sc.schedule(sample);
    RandomStream rng = walker_stream(cfg.seed, sample, w, attempt);
    RandomStream partner = partner_stream(cfg.seed, sample, w, attempt);
    Surface const& s0 = p.tree.surface(h[0]);
    auto const y0 = s0.sample_uniform(rng);
    SurfacePoint a = y0.point;
    SurfacePoint b = cfg.coupling == Coupling::kAntitheticStart ? s0.reflect(a) : a;
    double qa = sc.coef.beta(h[0], a.x, a.n, p) / y0.pdf;
    double qb = sc.coef.beta(h[0], b.x, b.n, p) / y0.pdf;
    double ta = 1.0;
    double tb = 1.0;
    bool alive_a = true;
    bool alive_b = true;
    double scale = sc.n;

    auto emit = [&](int i) {
      double const w_i = truncation_weight(i, cfg.steps) * scale;
      double const wa = alive_a ? 0.5 * (w_i * qa * ta) : 0.0;
      double const wb = alive_b ? 0.5 * (w_i * qb * tb) : 0.0;
      if (alive_a && alive_b && a.x == b.x) {
        out.push_back({wa + wb, a.x});
        return;
      }
      if (wa != 0.0) out.push_back({wa, a.x});
      if (wb != 0.0) out.push_back({wb, b.x});
    };
    emit(0);

    for (int i = 1; i <= cfg.steps; ++i) {
      int const prev = h[static_cast<std::size_t>(i - 1)];
      int const hi = h[static_cast<std::size_t>(i)];
      Surface const& s = p.tree.surface(hi);
      scale *= sc.coef.alpha_l1 * sc.sign(hi);
      TransitionResult ra;
      TransitionResult rb;
      if (cfg.coupling == Coupling::kIdentical) {
        ra = transition_sample(sc.ctx, p.tree, cfg.transition, a, prev, hi, rng, diag);
        rb = ra;
      } else if (cfg.transition == Transition::kRayCast && hi == prev) {
        Vec const d = rng.direction(s.dim());
        ra = ray_step(s, a, d, rng, rng, diag);
        Vec const db = d - 2.0 * d.dot(b.n) * b.n;
        rb = ray_step(s, b, db, partner, partner, diag);
      } else {
        if (cfg.transition == Transition::kRayCast) diag.raycast_fallbacks += 2;
        auto const smp = s.sample_uniform(rng);
        ra = area_step(sc.ctx, a, smp.point, smp.pdf);
        rb = area_step(sc.ctx, b, s.reflect(smp.point), smp.pdf);
      }
      alive_a = alive_a && ra.ok;
      alive_b = alive_b && rb.ok;
      if (!alive_a && !alive_b) return;
      if (alive_a) {
        qa *= ra.weight;
        ta *= ra.t_factor;
        a = ra.point;
      }
      if (alive_b) {
        qb *= rb.weight;
        tb *= rb.t_factor;
        b = rb.point;
      }
      emit(i);
    }
  };
  EstimateReport r = run(p, queries, cfg, job, walker);
  return r;
}

// ---------------------------------------------------------------------------
// Naive WoI: full N-ary tree of schedules per traversal.

EstimateReport naive_woi_estimate(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig cfg) {
  cfg.variant = Variant::kNaiveWoi;
  cfg.validate();
  KernelContext const ctx(p.dim());
  CoefficientSet const coef = build_coefficients(p);
  int const n = p.size();
  if (std::pow(static_cast<double>(n), cfg.steps) > kNaiveLeafLimit) {
    throw Error("naive-woi would enumerate N^M = " + std::to_string(n) + "^" + std::to_string(cfg.steps) +
                " schedules; use the woi estimator instead");
  }
  detail::EngineJob job{cfg.traversals, cfg.traversals};

  auto walker = [&](std::uint64_t sample, std::uint64_t w, std::uint64_t attempt, std::vector<WeightedSource>& out,
                    Diagnostics& diag) {
    RandomStream rng = walker_stream(cfg.seed, sample, w, attempt);
    auto visit = [&](auto&& self, int level, int h, SurfacePoint const& y, double q_star, double alpha_prod) -> void {
      out.push_back({truncation_weight(level, cfg.steps) * alpha_prod * q_star, y.x});
      if (level == cfg.steps) return;
      for (int next = 0; next < n; ++next) {
        double const a = coef.alpha[static_cast<std::size_t>(next)];
        if (a == 0.0) continue;
        auto const tr = transition_sample(ctx, p.tree, cfg.transition, y, h, next, rng, diag);
        if (!tr.ok) continue;
        self(self, level + 1, next, tr.point, q_star * tr.weight * tr.t_factor, alpha_prod * a);
      }
    };
    for (int h0 = 0; h0 < n; ++h0) {
      auto const y0 = p.tree.surface(h0).sample_uniform(rng);
      double const q0 = coef.beta(h0, y0.point.x, y0.point.n, p) / y0.pdf;
      if (q0 == 0.0) continue;
      visit(visit, 0, h0, y0.point, q0, 1.0);
    }
  };
  EstimateReport r = run(p, queries, cfg, job, walker);
  r.walkers = cfg.traversals;
  return r;
}

// ---------------------------------------------------------------------------
// WoB on a single closed surface.

WobTrace wob_trace(InterfaceProblem const& p, EstimatorConfig const& cfg, std::uint64_t walker) {
  if (p.size() != 1) throw Error("wob handles a single-surface Neumann problem; use woi for interfaces");
  p.check();
  Surface const& s = p.tree.surface(0);
  double const sigma = p.tree.sigma[0];
  Diagnostics diag;
  RandomStream rng = walker_stream(cfg.seed, walker, 0, 0);
  WobTrace tr;
  auto const y0 = s.sample_uniform(rng);
  double q = p.data[0](y0.point.x, y0.point.n) / sigma / y0.pdf;
  double t = 1.0;
  double pow2 = 1.0;
  SurfacePoint cur = y0.point;
  for (int i = 0;; ++i) {
    tr.points.push_back(cur);
    tr.q.push_back(q);
    tr.t.push_back(t);
    tr.weight.push_back((i < cfg.steps ? 2.0 : 1.0) * pow2 * t * q);
    if (i == cfg.steps) break;
    auto const step = ray_step(s, cur, rng.direction(s.dim()), rng, rng, diag);
    if (!step.ok) break;
    q = 0.5 * q;
    t *= step.t_factor;
    pow2 *= 2.0;
    cur = step.point;
  }
  return tr;
}

EstimateReport wob_estimate(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig cfg) {
  cfg.variant = Variant::kWob;
  cfg.transition = Transition::kRayCast;
  cfg.validate();
  if (p.size() != 1) throw Error("wob handles a single-surface Neumann problem; use woi for interfaces");
  p.check();
  Surface const& s = p.tree.surface(0);
  double const sigma = p.tree.sigma[0];
  detail::EngineJob job{cfg.walkers, cfg.walkers};

  // v ~ 2 sum_{i<M} 2^i T_i Q_i Phi(x, Y_i) + 2^M T_M Q_M Phi(x, Y_M), Q_i = Q_{i-1} / 2.
  auto walker = [&](std::uint64_t sample, std::uint64_t w, std::uint64_t attempt, std::vector<WeightedSource>& out,
                    Diagnostics& diag) {
    RandomStream rng = walker_stream(cfg.seed, sample, w, attempt);
    auto const y0 = s.sample_uniform(rng);
    double q = p.data[0](y0.point.x, y0.point.n) / sigma / y0.pdf;
    if (q == 0.0) return;
    double t = 1.0;
    double pow2 = 1.0;
    SurfacePoint cur = y0.point;
    for (int i = 0;; ++i) {
      out.push_back({(i < cfg.steps ? 2.0 : 1.0) * pow2 * t * q, cur.x});
      if (i == cfg.steps) return;
      auto const step = ray_step(s, cur, rng.direction(s.dim()), rng, rng, diag);
      if (!step.ok) return;
      q = 0.5 * q;
      t *= step.t_factor;
      pow2 *= 2.0;
      cur = step.point;
    }
  };
  return run(p, queries, cfg, job, walker);
}

EstimateReport gradient_estimate(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig cfg) {
  cfg.gradient = true;
  if (cfg.variant == Variant::kWoiVr) return woi_vr_estimate(p, queries, cfg);
  return woi_estimate(p, queries, cfg);
}

EstimateReport estimate(InterfaceProblem const& p, std::span<Vec const> queries, EstimatorConfig const& cfg) {
  switch (cfg.variant) {
    case Variant::kWob: return wob_estimate(p, queries, cfg);
    case Variant::kNaiveWoi: return naive_woi_estimate(p, queries, cfg);
    case Variant::kWoi: return woi_estimate(p, queries, cfg);
    case Variant::kWoiVr: return woi_vr_estimate(p, queries, cfg);
  }
  throw Error("unknown estimator variant");
}

}  // namespace woi
