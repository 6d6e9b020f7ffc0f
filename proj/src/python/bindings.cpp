#include "woi/app.hpp"
#include "woi/estimators.hpp"
#include "woi/kernels.hpp"
#include "woi/problems.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;

namespace {

using Points = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<woi::Vec> to_points(Points const& a, int dim) {
  if (a.ndim() != 2 || a.shape(1) != dim) {
    throw py::value_error("points must have shape (n, " + std::to_string(dim) + ")");
  }
  std::vector<woi::Vec> out;
  out.reserve(static_cast<std::size_t>(a.shape(0)));
  auto const r = a.unchecked<2>();
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    woi::Vec v(dim);
    for (int k = 0; k < dim; ++k) v[k] = r(i, k);
    out.push_back(std::move(v));
  }
  return out;
}

py::array_t<double> to_array(std::vector<double> const& v, py::ssize_t cols = 0) {
  if (cols == 0) return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
  return py::array_t<double>({static_cast<py::ssize_t>(v.size()) / cols, cols}, v.data());
}

py::array_t<double> points_array(std::vector<woi::Vec> const& pts, int dim) {
  std::vector<double> flat;
  flat.reserve(pts.size() * static_cast<std::size_t>(dim));
  for (auto const& p : pts) flat.insert(flat.end(), p.data(), p.data() + dim);
  return to_array(flat, dim);
}

woi::Vec to_vec(std::vector<double> const& v) { return Eigen::Map<woi::Vec const>(v.data(), static_cast<Eigen::Index>(v.size())); }

py::dict estimate(std::string const& benchmark, std::optional<Points> const& points, std::string const& estimator,
                  std::uint64_t walkers, std::optional<int> steps, std::optional<std::string> const& transition,
                  std::string const& coupling, std::uint64_t seed, int threads, bool gradient, int dim,
                  std::uint64_t traversals) {
  woi::Benchmark const b = woi::make_benchmark(benchmark, dim);
  int const d = b.problem.dim();
  std::vector<woi::Vec> const q = points ? to_points(*points, d) : woi::make_queries(b, seed);

  woi::EstimatorConfig cfg;
  cfg.variant = woi::parse_variant(estimator);
  cfg.walkers = walkers;
  cfg.steps = steps.value_or(b.steps);
  cfg.transition = transition ? woi::parse_transition(*transition) : b.transition;
  cfg.coupling = woi::parse_coupling(coupling);
  cfg.seed = seed;
  cfg.threads = threads;
  cfg.gradient = gradient;
  cfg.traversals = traversals;

  woi::EstimateReport r;
  {
    py::gil_scoped_release nogil;
    r = woi::estimate(b.problem, q, cfg);
  }

  py::dict out;
  out["queries"] = points_array(q, d);
  out["estimate"] = to_array(r.estimate);
  out["variance"] = to_array(r.variance);
  out["ci_halfwidth"] = to_array(r.ci_halfwidth);
  if (gradient) {
    out["gradient"] = to_array(r.gradient, d);
    out["gradient_ci_halfwidth"] = to_array(r.gradient_ci_halfwidth, d);
  }
  std::vector<double> truth;
  if (b.truth) {
    for (auto const& x : q) truth.push_back(b.truth(x));
    out["truth"] = to_array(truth);
    out["relative_l2"] = woi::l2_error(r.estimate, truth, 0).relative;
  }
  out["effective_samples"] = r.effective_samples;
  out["steps"] = r.steps;
  out["wall_seconds"] = r.wall_seconds;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Walk-on-interfaces Monte Carlo solver for piecewise-constant conductivity problems.";

  // Translators run newest first, so the base class goes first.
  py::register_exception<woi::Error>(m, "WoiError", PyExc_RuntimeError);
  py::register_exception<woi::ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("benchmark_names", &woi::benchmark_names);

  m.def("estimate", &estimate, py::arg("benchmark"), py::arg("points") = py::none(), py::arg("estimator") = "woi",
        py::arg("walkers") = 100000, py::arg("steps") = py::none(), py::arg("transition") = py::none(),
        py::arg("coupling") = "antithetic", py::arg("seed") = 0, py::arg("threads") = 1, py::arg("gradient") = false,
        py::arg("dim") = 3, py::arg("traversals") = 1000,
        "Estimate a named benchmark at `points` (n, d) or at its default query set.");

  m.def(
      "truth",
      [](std::string const& benchmark, Points const& points, int dim) {
        woi::Benchmark const b = woi::make_benchmark(benchmark, dim);
        std::vector<double> out;
        for (auto const& x : to_points(points, b.problem.dim())) out.push_back(b.truth(x));
        return to_array(out);
      },
      py::arg("benchmark"), py::arg("points"), py::arg("dim") = 3);

  // Config documents cross as JSON text so the Python side needs no schema of its own.
  m.def(
      "run_json",
      [](std::string const& doc, std::string const& base_dir) {
        woi::RunConfig const cfg = woi::parse_run_config(nlohmann::json::parse(doc), base_dir);
        nlohmann::json report;
        {
          py::gil_scoped_release nogil;
          report = woi::run(cfg);
        }
        return report.dump();
      },
      py::arg("config"), py::arg("base_dir") = ".");

  m.def(
      "green",
      [](std::vector<double> const& x, std::vector<double> const& y) {
        return woi::KernelContext(static_cast<int>(x.size())).green(to_vec(x), to_vec(y));
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "green_gradient",
      [](std::vector<double> const& x, std::vector<double> const& y) {
        woi::Vec const g = woi::KernelContext(static_cast<int>(x.size())).green_gradient(to_vec(x), to_vec(y));
        return std::vector<double>(g.data(), g.data() + g.size());
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "poincare_kernel",
      [](std::vector<double> const& x, std::vector<double> const& n, std::vector<double> const& y) {
        return woi::KernelContext(static_cast<int>(x.size())).poincare_kernel(to_vec(x), to_vec(n), to_vec(y));
      },
      py::arg("x"), py::arg("n"), py::arg("y"));
}
