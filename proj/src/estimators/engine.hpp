#pragma once

#include "woi/estimators.hpp"

#include <functional>

namespace woi::detail {

// Streaming per-query moments (Welford within a task, Chan across tasks).
struct Moments {
  std::uint64_t n = 0;
  std::vector<double> mean;
  std::vector<double> m2;
  std::vector<double> grad_mean;
  std::vector<double> grad_m2;

  void add(std::span<double const> x, std::span<double const> g);
  void merge(Moments const& o);
};

// Appends the weighted sources of one walker. Throwing SingularityError asks
// for a redraw of the same walker with attempt + 1.
using WalkerFn = std::function<void(std::uint64_t sample, std::uint64_t walker, std::uint64_t attempt,
                                    std::vector<WeightedSource>& out, Diagnostics& diag)>;

struct EngineJob {
  std::uint64_t samples = 0;
  std::uint64_t walkers = 0;  // spread over samples as evenly as possible
  bool gradient = false;
  int threads = 1;
};

// Every sample averages its walkers' kernel sums; moments are taken over samples.
// Tasks cover fixed sample ranges and merge in task order, so the result does
// not depend on the thread count.
Moments run_engine(KernelContext const& ctx, QueryBlock const& q, EngineJob const& job, WalkerFn const& walker,
                   Diagnostics& diag);

// Fills estimate, variance and confidence fields of `r` from `m`.
void finish_report(Moments const& m, std::size_t n_queries, int dim, bool gradient, EstimateReport& r);

}  // namespace woi::detail
