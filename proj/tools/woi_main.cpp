#include "woi/app.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

namespace {

std::uint64_t parse_count(std::string const& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (std::exception const&) {
    throw woi::ConfigError("not a walker count: \"" + s + "\"");
  }
  if (used != s.size() || !(v >= 1.0) || v != std::floor(v)) throw woi::ConfigError("not a walker count: \"" + s + "\"");
  return static_cast<std::uint64_t>(v);
}

std::vector<std::uint64_t> parse_ladder(std::string const& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_count(item));
  return out;
}

int default_threads() {
  if (char const* env = std::getenv("WOI_THREADS")) {
    try {
      int const n = std::stoi(env);
      if (n >= 1) return n;
    } catch (std::exception const&) {
    }
    throw woi::ConfigError("WOI_THREADS must be a positive integer");
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Walk-on-interfaces Monte Carlo solver"};
  std::string config, benchmark, estimator, walkers, schedules, out, ladder, transition, coupling;
  int steps = 0, threads = 0, dim = 0;
  std::uint64_t seed = 0;
  bool gradient = false, emit = false;
  app.add_option("--config", config, "Run config JSON");
  app.add_option("--benchmark", benchmark, "Benchmark name (example1, example2-<d>d, example3-2d, example3-3d)");
  app.add_option("--dim", dim, "Dimension for the example2 benchmark");
  app.add_option("--estimator", estimator, "wob | naive-woi | woi | woi-vr");
  app.add_option("--walkers", walkers, "Walker count W (accepts 1e6)");
  app.add_option("--steps", steps, "Truncation order M");
  app.add_option("--schedules", schedules, "Schedule count S (0: one per sample)");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  app.add_option("--threads", threads, "Worker threads (default: WOI_THREADS or 1)");
  app.add_option("--transition", transition, "uniform-area | ray-cast");
  app.add_option("--coupling", coupling, "antithetic | antithetic-start | identical");
  app.add_flag("--gradient", gradient, "Also estimate the gradient");
  app.add_option("--out", out, "Output directory");
  app.add_option("--convergence", ladder, "Walker ladder, e.g. 1e4,1e5,1e6");
  app.add_flag("--emit-training", emit, "Write interior/boundary training CSVs");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    nlohmann::json doc = nlohmann::json::object();
    std::filesystem::path base = ".";
    if (!config.empty()) {
      std::ifstream in(config);
      if (!in) throw woi::ConfigError("cannot open config " + config);
      try {
        doc = nlohmann::json::parse(in);
      } catch (nlohmann::json::exception const& e) {
        throw woi::ConfigError(config + ": " + e.what());
      }
      if (!doc.is_object()) throw woi::ConfigError("run config must be a JSON object");
      std::filesystem::path const p(config);
      if (p.has_parent_path()) base = p.parent_path();
    }
    if (!benchmark.empty()) {
      doc.erase("problem");
      doc["benchmark"] = benchmark;
    }
    if (dim > 0) doc["dim"] = dim;
    if (!estimator.empty()) doc["estimator"] = estimator;
    if (!walkers.empty()) doc["walkers"] = parse_count(walkers);
    if (steps > 0) doc["steps"] = steps;
    if (!schedules.empty()) doc["schedules"] = std::stoull(schedules);
    if (*seed_opt) doc["seed"] = seed;
    if (threads > 0) doc["threads"] = threads;
    else if (!doc.contains("threads")) doc["threads"] = default_threads();
    if (!transition.empty()) doc["transition"] = transition;
    if (!coupling.empty()) doc["coupling"] = coupling;
    if (gradient) doc["gradient"] = true;
    if (!out.empty()) doc["out"] = out;
    if (!ladder.empty()) doc["convergence"] = parse_ladder(ladder);
    if (emit) doc["emit_training"] = true;

    woi::RunConfig const cfg = woi::parse_run_config(doc, base);
    nlohmann::json const report = woi::run(cfg);
    std::cout << "wrote " << (cfg.out_dir / "report.json").string();
    if (report.contains("relative_l2")) std::cout << "  relative_l2=" << report["relative_l2"].get<double>();
    if (report.contains("slope")) std::cout << "  slope=" << report["slope"].get<double>();
    std::cout << '\n';
    return 0;
  } catch (woi::ConfigError const& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
