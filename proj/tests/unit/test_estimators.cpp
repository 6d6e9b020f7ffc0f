#include "woi/estimators.hpp"
#include "woi/problems.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace woi {
namespace {

std::vector<Vec> interior_points_2d() {
  return {make_vec({0.1, 0.05}), make_vec({0.55, 0.2}), make_vec({-0.3, 0.6}), make_vec({0.0, -0.75})};
}

InterfaceProblem disk_cos_theta() {
  InterfaceProblem p;
  p.tree.surfaces = {std::make_shared<Sphere>(make_vec({0, 0}), 1.0)};
  p.tree.parent = {-1};
  p.tree.sigma = {1.0};
  p.data = {BoundaryField::custom("cos", [](Vec const& x, Vec const&) { return x[0]; })};
  return p;
}

InterfaceProblem zeroed(InterfaceProblem p) {
  for (auto& f : p.data) f = BoundaryField::zero();
  return p;
}

InterfaceProblem scaled(InterfaceProblem p, double c) {
  for (auto& f : p.data) f = f.scaled(c);
  return p;
}

EstimatorConfig config(Variant v, std::uint64_t walkers, int steps = 3) {
  EstimatorConfig c;
  c.variant = v;
  c.walkers = walkers;
  c.steps = steps;
  c.traversals = walkers;
  c.seed = 42;
  return c;
}

TEST(Estimators, ZeroDataAnnihilates) {
  InterfaceProblem const p = zeroed(example3_2d().problem);
  auto const q = interior_points_2d();
  for (Variant v : {Variant::kNaiveWoi, Variant::kWoi, Variant::kWoiVr}) {
    auto const r = estimate(p, q, config(v, 200));
    for (double e : r.estimate) EXPECT_EQ(e, 0.0) << to_string(v);
    for (double e : r.variance) EXPECT_EQ(e, 0.0);
  }
  auto const g = gradient_estimate(p, q, config(Variant::kWoi, 200));
  for (double e : g.gradient) EXPECT_EQ(e, 0.0);
  auto const w = wob_estimate(zeroed(disk_cos_theta()), q, config(Variant::kWob, 200));
  for (double e : w.estimate) EXPECT_EQ(e, 0.0);
}

TEST(Estimators, LinearInDataBitwise) {
  InterfaceProblem const p = example1_harmonic().problem;
  auto const q = interior_points_2d();
  for (Variant v : {Variant::kNaiveWoi, Variant::kWoi, Variant::kWoiVr}) {
    for (Transition t : {Transition::kUniformArea, Transition::kRayCast}) {
      EstimatorConfig c = config(v, 300, 2);
      c.transition = t;
      auto const a = estimate(p, q, c);
      auto const b = estimate(scaled(p, 4.0), q, c);
      for (std::size_t j = 0; j < q.size(); ++j) EXPECT_EQ(b.estimate[j], 4.0 * a.estimate[j]) << to_string(v);
    }
  }
  auto const a = wob_estimate(disk_cos_theta(), q, config(Variant::kWob, 300, 5));
  auto const b = wob_estimate(scaled(disk_cos_theta(), 0.25), q, config(Variant::kWob, 300, 5));
  for (std::size_t j = 0; j < q.size(); ++j) EXPECT_EQ(b.estimate[j], 0.25 * a.estimate[j]);
}

TEST(Estimators, DeterministicAcrossRunsAndThreads) {
  InterfaceProblem const p = example3_2d().problem;
  auto const q = interior_points_2d();
  for (Variant v : {Variant::kWoi, Variant::kWoiVr}) {
    EstimatorConfig c = config(v, 3000);
    c.gradient = true;
    auto const a = estimate(p, q, c);
    auto const b = estimate(p, q, c);
    c.threads = 3;
    auto const t = estimate(p, q, c);
    EXPECT_EQ(a.estimate, b.estimate);
    EXPECT_EQ(a.estimate, t.estimate);
    EXPECT_EQ(a.variance, t.variance);
    EXPECT_EQ(a.gradient, t.gradient);
  }
  EstimatorConfig c = config(Variant::kWoi, 3000);
  auto const a = estimate(p, q, c);
  c.seed = 43;
  EXPECT_NE(a.estimate, estimate(p, q, c).estimate);
}

TEST(Estimators, ReportFields) {
  InterfaceProblem const p = example3_2d().problem;
  auto const q = interior_points_2d();
  EstimatorConfig c = config(Variant::kWoi, 1000);
  c.schedules = 10;
  auto const r = estimate(p, q, c);
  EXPECT_EQ(r.effective_samples, 10u);
  EXPECT_EQ(r.schedules, 10u);
  for (std::size_t j = 0; j < q.size(); ++j) {
    EXPECT_GE(r.variance[j], 0.0);
    EXPECT_DOUBLE_EQ(r.ci_halfwidth[j], 1.96 * std::sqrt(r.variance[j] / 10.0));
  }
  c.schedules = 0;
  EXPECT_EQ(estimate(p, q, c).effective_samples, 1000u);
  EXPECT_EQ(estimate(p, q, config(Variant::kWoiVr, 1000)).effective_samples, 500u);
}

TEST(Estimators, InvalidConfigs) {
  InterfaceProblem const p = example3_2d().problem;
  auto const q = interior_points_2d();
  EXPECT_THROW(estimate(p, q, config(Variant::kWoi, 0)), ConfigError);
  EXPECT_THROW(estimate(p, q, config(Variant::kWoiVr, 1)), ConfigError);
  EXPECT_THROW(estimate(p, std::vector<Vec>{make_vec({0, 0, 0})}, config(Variant::kWoi, 10)), ConfigError);
  EXPECT_THROW(wob_estimate(p, q, config(Variant::kWob, 10)), Error);
  // 3^11 > 1e5 schedules.
  InterfaceProblem const e1 = example1_harmonic().problem;
  EXPECT_THROW(naive_woi_estimate(e1, q, config(Variant::kNaiveWoi, 1, 11)), Error);
}

TEST(Wob, HalvingIsExact) {
  InterfaceProblem const p = disk_cos_theta();
  EstimatorConfig const c = config(Variant::kWob, 1, 6);
  for (std::uint64_t w = 0; w < 50; ++w) {
    WobTrace const t = wob_trace(p, c, w);
    ASSERT_EQ(t.q.size(), 7u);
    double const q0 = t.q[0];
    for (std::size_t i = 0; i < t.q.size(); ++i) {
      EXPECT_EQ(t.q[i], q0 / std::ldexp(1.0, static_cast<int>(i)));
      // Convex boundary: one crossing per line, so T_i = +-1.
      EXPECT_EQ(std::abs(t.t[i]), 1.0);
      double const expect = i < 6 ? 2.0 * q0 * t.t[i] : q0 * t.t[i];
      EXPECT_EQ(t.weight[i], expect);
    }
  }
}

TEST(Wob, DiskNeumannProblem) {
  // d_n v = cos(theta) on the unit disk: v = r cos(theta) + C.
  InterfaceProblem const p = disk_cos_theta();
  std::vector<Vec> const q = {make_vec({0.3, 0.2}), make_vec({0.0, 0.0})};
  auto const r = wob_estimate(p, q, config(Variant::kWob, 200000, 8));
  double const diff = r.estimate[0] - r.estimate[1];
  double const ci = std::hypot(r.ci_halfwidth[0], r.ci_halfwidth[1]) * std::sqrt(2.0);
  EXPECT_LE(std::abs(diff - 0.3), 3.0 * ci);
  EXPECT_EQ(r.diagnostics.aborted_walkers, 0u);
}

TEST(Wob, MatchesWoiOnSingleSurface) {
  // With ray-cast transitions the N = 1 WoI walk is the WoB walk.
  InterfaceProblem const p = disk_cos_theta();
  auto const q = interior_points_2d();
  EstimatorConfig c = config(Variant::kWoi, 20000, 4);
  c.transition = Transition::kRayCast;
  auto const a = woi_estimate(p, q, c);
  auto const b = wob_estimate(p, q, config(Variant::kWob, 20000, 4));
  for (std::size_t j = 0; j < q.size(); ++j) {
    EXPECT_NEAR(a.estimate[j], b.estimate[j], 1e-9 * (1.0 + std::abs(b.estimate[j])));
  }
}

TEST(WoiVr, IdenticalCouplingIsPlainWoi) {
  InterfaceProblem const p = example1_harmonic().problem;
  auto const q = interior_points_2d();
  for (Transition t : {Transition::kUniformArea, Transition::kRayCast}) {
    EstimatorConfig c = config(Variant::kWoiVr, 2000);
    c.coupling = Coupling::kIdentical;
    c.transition = t;
    auto const vr = woi_vr_estimate(p, q, c);
    EstimatorConfig w = config(Variant::kWoi, 1000);
    w.transition = t;
    auto const plain = woi_estimate(p, q, w);
    EXPECT_EQ(vr.estimate, plain.estimate);
    EXPECT_EQ(vr.variance, plain.variance);
  }
}

TEST(WoiVr, CouplingsAgreeInMean) {
  InterfaceProblem const p = example3_2d().problem;
  auto const q = interior_points_2d();
  auto const ref = woi_estimate(p, q, config(Variant::kWoi, 100000, 2));
  for (Coupling cp : {Coupling::kAntithetic, Coupling::kAntitheticStart}) {
    EstimatorConfig c = config(Variant::kWoiVr, 100000, 2);
    c.coupling = cp;
    c.seed = 7;
    auto const vr = woi_vr_estimate(p, q, c);
    for (std::size_t j = 0; j < q.size(); ++j) {
      double const tol = 3.0 * std::hypot(ref.ci_halfwidth[j], vr.ci_halfwidth[j]) / 1.96;
      EXPECT_LE(std::abs(ref.estimate[j] - vr.estimate[j]), tol) << to_string(cp) << " j=" << j;
    }
  }
}

TEST(Transitions, UniformAreaWeightIsKernelOverPdf) {
  DomainTree const t = example3_2d().problem.tree;
  KernelContext const ctx(2);
  RandomStream r(1, 0);
  Diagnostics d;
  SurfacePoint const from{make_vec({1, 0}), make_vec({1, 0})};
  for (int i = 0; i < 50; ++i) {
    auto const tr = transition_sample(ctx, t, Transition::kUniformArea, from, 0, 1, r, d);
    EXPECT_NEAR(tr.point.x.norm(), 0.4, 1e-14);
    EXPECT_EQ(tr.t_factor, 1.0);
    EXPECT_NEAR(tr.weight, ctx.poincare_kernel(tr.point.x, tr.point.n, from.x) * (2 * std::numbers::pi * 0.4), 1e-12);
  }
  EXPECT_EQ(d.raycast_fallbacks, 0u);
}

TEST(Transitions, RayCastOnConvexSurface) {
  DomainTree const t = example3_2d().problem.tree;
  KernelContext const ctx(2);
  RandomStream r(2, 0);
  Diagnostics d;
  SurfacePoint const from{make_vec({0, 1}), make_vec({0, 1})};
  for (int i = 0; i < 100; ++i) {
    auto const tr = transition_sample(ctx, t, Transition::kRayCast, from, 0, 0, r, d);
    ASSERT_TRUE(tr.ok);
    EXPECT_TRUE(tr.ray_cast);
    EXPECT_EQ(tr.weight, 0.5);
    EXPECT_EQ(std::abs(tr.t_factor), 1.0);
    EXPECT_NEAR(tr.point.x.norm(), 1.0, 1e-12);
  }
  transition_sample(ctx, t, Transition::kRayCast, from, 0, 1, r, d);
  EXPECT_EQ(d.raycast_fallbacks, 1u);
}

TEST(Transitions, ModesAgreeInMean) {
  InterfaceProblem const p = example3_2d().problem;
  auto const q = interior_points_2d();
  EstimatorConfig a = config(Variant::kWoi, 100000, 3);
  EstimatorConfig b = a;
  b.transition = Transition::kRayCast;
  b.seed = 99;
  auto const ra = woi_estimate(p, q, a);
  auto const rb = woi_estimate(p, q, b);
  for (std::size_t j = 0; j < q.size(); ++j) {
    double const tol = 3.0 * std::hypot(ra.ci_halfwidth[j], rb.ci_halfwidth[j]) / 1.96;
    EXPECT_LE(std::abs(ra.estimate[j] - rb.estimate[j]), tol) << "j=" << j;
  }
}

// Independent reassembly of the WoI series from the public stream layout:
// sample s draws its schedule from (kSchedule, s) and walks on (kWalker, s, 0, 0).
TEST(Woi, MatchesExplicitSeriesAssembly) {
  InterfaceProblem const p = example1_harmonic().problem;
  Vec const x = make_vec({0.2, -0.3});
  int const m = 3;
  std::uint64_t const w = 64;
  EstimatorConfig c = config(Variant::kWoi, w, m);
  auto const r = woi_estimate(p, std::vector<Vec>{x}, c);

  KernelContext const ctx(2);
  CoefficientSet const coef = build_coefficients(p);
  SchedulePdf const pdf(coef);
  double const n = p.size();
  double total = 0.0;
  for (std::uint64_t s = 0; s < w; ++s) {
    RandomStream srng(c.seed, stream_id(StreamTag::kSchedule, s));
    auto const h = pdf.sample(m, srng);
    RandomStream rng(c.seed, stream_id(StreamTag::kWalker, s, 0, 0));
    Diagnostics d;
    auto const y0 = p.tree.surface(h[0]).sample_uniform(rng);
    double q = coef.beta(h[0], y0.point.x, y0.point.n, p) / y0.pdf;
    std::vector<double> terms{n * q * ctx.green(x, y0.point.x)};
    double signs = 1.0;
    SurfacePoint cur = y0.point;
    for (int i = 1; i <= m; ++i) {
      auto const hi = h[static_cast<std::size_t>(i)];
      signs *= coef.alpha[static_cast<std::size_t>(hi)] > 0 ? 1.0 : -1.0;
      auto const tr = transition_sample(ctx, p.tree, Transition::kUniformArea, cur, h[static_cast<std::size_t>(i - 1)],
                                        hi, rng, d);
      q *= tr.weight;
      cur = tr.point;
      terms.push_back(n * std::pow(coef.alpha_l1, i) * signs * q * ctx.green(x, cur.x));
    }
    // w_i = 1 for i < M and 1/2 for i = M.
    double sum = 0.0;
    for (int i = 0; i < m; ++i) sum += terms[static_cast<std::size_t>(i)];
    sum += 0.5 * terms[static_cast<std::size_t>(m)];
    total += sum;
  }
  EXPECT_NEAR(r.estimate[0], total / static_cast<double>(w), 1e-10 * (1.0 + std::abs(total / w)));
}

TEST(NaiveWoi, SingleSurfaceAgreesWithWoi) {
  InterfaceProblem const p = disk_cos_theta();
  auto const q = interior_points_2d();
  auto const a = naive_woi_estimate(p, q, config(Variant::kNaiveWoi, 20000, 3));
  auto const b = woi_estimate(p, q, config(Variant::kWoi, 20000, 3));
  for (std::size_t j = 0; j < q.size(); ++j) {
    double const tol = 3.0 * std::hypot(a.ci_halfwidth[j], b.ci_halfwidth[j]) / 1.96;
    EXPECT_LE(std::abs(a.estimate[j] - b.estimate[j]), tol);
  }
}

TEST(NaiveWoi, ZeroOrderIsHalfSingleLayer) {
  InterfaceProblem const p = example3_2d().problem;
  std::vector<Vec> const x{make_vec({0.3, 0.1})};
  EstimatorConfig c = config(Variant::kNaiveWoi, 50, 0);
  auto const r = naive_woi_estimate(p, x, c);
  KernelContext const ctx(2);
  CoefficientSet const coef = build_coefficients(p);
  // Only surface 1 carries data; surface 2's draw is still consumed.
  double total = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    RandomStream rng(c.seed, stream_id(StreamTag::kWalker, s, 0, 0));
    auto const y = p.tree.surface(0).sample_uniform(rng);
    total += 0.5 * coef.beta(0, y.point.x, y.point.n, p) / y.pdf * ctx.green(x[0], y.point.x);
  }
  EXPECT_NEAR(r.estimate[0], total / 50.0, 1e-12 * (1.0 + std::abs(total)));
}

TEST(Gradient, NearSurfaceQueriesFlagged) {
  InterfaceProblem const p = example3_2d().problem;
  std::vector<Vec> const q{make_vec({0.4005, 0.0}), make_vec({0.7, 0.0})};
  auto const r = gradient_estimate(p, q, config(Variant::kWoi, 100));
  EXPECT_TRUE(r.near_surface[0]);
  EXPECT_FALSE(r.near_surface[1]);
  EXPECT_EQ(r.diagnostics.near_surface_queries, 1u);
  EXPECT_EQ(r.gradient.size(), 4u);
}

TEST(Gradient, ValueMatchesScalarRun) {
  InterfaceProblem const p = example3_2d().problem;
  auto const q = interior_points_2d();
  auto const g = gradient_estimate(p, q, config(Variant::kWoi, 500));
  auto const v = woi_estimate(p, q, config(Variant::kWoi, 500));
  EXPECT_EQ(g.estimate, v.estimate);
}

}  // namespace
}  // namespace woi
