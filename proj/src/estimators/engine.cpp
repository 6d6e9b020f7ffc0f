#include "engine.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

namespace woi::detail {
namespace {

constexpr std::uint64_t kSamplesPerTask = 256;
constexpr std::uint64_t kMaxAttempts = 1000;

void welford(std::uint64_t n, std::span<double const> x, std::vector<double>& mean, std::vector<double>& m2) {
  double const inv = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < x.size(); ++j) {
    double const delta = x[j] - mean[j];
    mean[j] += delta * inv;
    m2[j] += delta * (x[j] - mean[j]);
  }
}

void chan(std::uint64_t na, std::uint64_t nb, std::vector<double>& mean_a, std::vector<double>& m2_a,
          std::vector<double> const& mean_b, std::vector<double> const& m2_b) {
  double const n = static_cast<double>(na + nb);
  double const fb = static_cast<double>(nb) / n;
  double const cross = static_cast<double>(na) * static_cast<double>(nb) / n;
  for (std::size_t j = 0; j < mean_a.size(); ++j) {
    double const delta = mean_b[j] - mean_a[j];
    mean_a[j] += delta * fb;
    m2_a[j] += m2_b[j] + delta * delta * cross;
  }
}

std::uint64_t walkers_in(EngineJob const& job, std::uint64_t sample) {
  std::uint64_t const base = job.walkers / job.samples;
  return base + (sample < job.walkers % job.samples ? 1 : 0);
}

struct TaskBuffers {
  std::vector<WeightedSource> sources;
  std::vector<double> acc;
  std::vector<double> grad_acc;
  std::vector<double> scratch;
  std::vector<double> grad_scratch;
  std::vector<double> grad_packed;
};

// Kernel sums of one walker into (value, gradient); false if it touched a query.
bool evaluate_walker(KernelContext const& ctx, QueryBlock const& q, bool gradient, TaskBuffers& b,
                     std::vector<double>& value, std::vector<double>& grad) {
  std::fill(value.begin(), value.end(), 0.0);
  double min_r2 = sum_green(ctx, q, b.sources, value);
  if (gradient) {
    std::fill(grad.begin(), grad.end(), 0.0);
    min_r2 = std::min(min_r2, sum_green_gradient(ctx, q, b.sources, grad));
  }
  return min_r2 >= kSingularDistance * kSingularDistance;
}

Moments run_task(KernelContext const& ctx, QueryBlock const& q, EngineJob const& job, WalkerFn const& walker,
                 std::uint64_t begin, std::uint64_t end, Diagnostics& diag) {
  std::size_t const n = q.size();
  std::size_t const gsize = q.stride() * static_cast<std::size_t>(q.dim());
  int const d = q.dim();
  Moments m;
  m.mean.assign(n, 0.0);
  m.m2.assign(n, 0.0);
  if (job.gradient) {
    m.grad_mean.assign(n * static_cast<std::size_t>(d), 0.0);
    m.grad_m2.assign(n * static_cast<std::size_t>(d), 0.0);
  }
  TaskBuffers b;
  b.acc.resize(q.stride());
  b.scratch.resize(q.stride());
  if (job.gradient) {
    b.grad_acc.resize(gsize);
    b.grad_scratch.resize(gsize);
    b.grad_packed.resize(n * static_cast<std::size_t>(d));
  }

  for (std::uint64_t s = begin; s < end; ++s) {
    std::uint64_t const k = walkers_in(job, s);
    bool const direct = k == 1;
    if (!direct) {
      std::fill(b.acc.begin(), b.acc.end(), 0.0);
      std::fill(b.grad_acc.begin(), b.grad_acc.end(), 0.0);
    }
    auto& value = direct ? b.acc : b.scratch;
    auto& grad = direct ? b.grad_acc : b.grad_scratch;
    for (std::uint64_t w = 0; w < k; ++w) {
      for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt == kMaxAttempts) throw Error("walker keeps landing on query points; aborting");
        b.sources.clear();
        try {
          walker(s, w, attempt, b.sources, diag);
        } catch (SingularityError const&) {
          ++diag.resampled_walkers;
          continue;
        }
        if (evaluate_walker(ctx, q, job.gradient, b, value, grad)) break;
        ++diag.resampled_walkers;
      }
      if (!direct) {
        for (std::size_t j = 0; j < n; ++j) b.acc[j] += value[j];
        for (std::size_t j = 0; j < b.grad_acc.size(); ++j) b.grad_acc[j] += grad[j];
      }
    }
    if (!direct) {
      double const inv = 1.0 / static_cast<double>(k);
      for (std::size_t j = 0; j < n; ++j) b.acc[j] *= inv;
      for (double& g : b.grad_acc) g *= inv;
    }
    ++m.n;
    welford(m.n, std::span<double const>(b.acc.data(), n), m.mean, m.m2);
    if (job.gradient) {
      for (std::size_t j = 0; j < n; ++j) {
        for (int c = 0; c < d; ++c) {
          b.grad_packed[j * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)] =
              b.grad_acc[static_cast<std::size_t>(c) * q.stride() + j];
        }
      }
      welford(m.n, b.grad_packed, m.grad_mean, m.grad_m2);
    }
  }
  return m;
}

}  // namespace

void Moments::add(std::span<double const> x, std::span<double const> g) {
  ++n;
  welford(n, x, mean, m2);
  if (!g.empty()) welford(n, g, grad_mean, grad_m2);
}

void Moments::merge(Moments const& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  chan(n, o.n, mean, m2, o.mean, o.m2);
  if (!grad_mean.empty()) chan(n, o.n, grad_mean, grad_m2, o.grad_mean, o.grad_m2);
  n += o.n;
}

Moments run_engine(KernelContext const& ctx, QueryBlock const& q, EngineJob const& job, WalkerFn const& walker,
                   Diagnostics& diag) {
  if (job.samples == 0) throw Error("engine needs at least one sample");
  if (job.walkers < job.samples) throw Error("fewer walkers than samples");
  std::uint64_t const n_tasks = (job.samples + kSamplesPerTask - 1) / kSamplesPerTask;
  auto task_range = [&](std::uint64_t t) {
    std::uint64_t const begin = t * kSamplesPerTask;
    return std::pair{begin, std::min(job.samples, begin + kSamplesPerTask)};
  };

  Moments total;
  int const threads = static_cast<int>(std::min<std::uint64_t>(std::max(job.threads, 1), n_tasks));
  if (threads == 1) {
    for (std::uint64_t t = 0; t < n_tasks; ++t) {
      auto const [begin, end] = task_range(t);
      total.merge(run_task(ctx, q, job, walker, begin, end, diag));
    }
    return total;
  }

  std::atomic<std::uint64_t> next{0};
  std::mutex mu;
  std::map<std::uint64_t, Moments> pending;
  std::uint64_t next_merge = 0;
  std::exception_ptr failure;
  std::vector<Diagnostics> thread_diag(static_cast<std::size_t>(threads));
  {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) {
      pool.emplace_back([&, i] {
        for (;;) {
          std::uint64_t const t = next.fetch_add(1);
          if (t >= n_tasks) return;
          try {
            auto const [begin, end] = task_range(t);
            Moments m = run_task(ctx, q, job, walker, begin, end, thread_diag[static_cast<std::size_t>(i)]);
            std::lock_guard lock(mu);
            pending.emplace(t, std::move(m));
            while (!pending.empty() && pending.begin()->first == next_merge) {
              total.merge(pending.begin()->second);
              pending.erase(pending.begin());
              ++next_merge;
            }
          } catch (...) {
            std::lock_guard lock(mu);
            if (!failure) failure = std::current_exception();
            next.store(n_tasks);
            return;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (auto const& td : thread_diag) diag += td;
  return total;
}

void finish_report(Moments const& m, std::size_t n_queries, int dim, bool gradient, EstimateReport& r) {
  double const n = static_cast<double>(m.n);
  auto var = [&](double m2) { return m.n > 1 ? m2 / (n - 1.0) : 0.0; };
  r.effective_samples = m.n;
  r.estimate = m.mean;
  r.variance.resize(n_queries);
  r.ci_halfwidth.resize(n_queries);
  for (std::size_t j = 0; j < n_queries; ++j) {
    r.variance[j] = var(m.m2[j]);
    r.ci_halfwidth[j] = 1.96 * std::sqrt(r.variance[j] / n);
  }
  if (gradient) {
    std::size_t const g = n_queries * static_cast<std::size_t>(dim);
    r.gradient = m.grad_mean;
    r.gradient_variance.resize(g);
    r.gradient_ci_halfwidth.resize(g);
    for (std::size_t j = 0; j < g; ++j) {
      r.gradient_variance[j] = var(m.grad_m2[j]);
      r.gradient_ci_halfwidth[j] = 1.96 * std::sqrt(r.gradient_variance[j] / n);
    }
  }
}

}  // namespace woi::detail
