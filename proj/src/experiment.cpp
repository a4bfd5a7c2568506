#include "edmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

#include "edmc/error.hpp"
#include "edmc/sampling.hpp"

namespace edmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class T>
std::vector<T> json_list(const Json& j, const char* key, std::vector<T> fallback) {
  if (!j.contains(key)) return fallback;
  return j[key].get<std::vector<T>>();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  return rng.engine()();
}

TrialResult run_trial(const TrialSpec& spec, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  TrialResult out;
  out.seed = seed;
  out.init_error = kInf;
  out.rel_error = kInf;
  out.rel_error_observed = kInf;
  try {
    DatasetSpec ds = spec.dataset;
    ds.seed = seed;
    const PointCloud points = generate(ds);
    const Index r = points.r();
    const RankRGram truth = factored_gram_from_points(points);

    PointCloud observed_points = points;
    if (spec.noise_bound) {
      observed_points = center_points(perturb_points(points, {*spec.noise_bound, derive_seed(seed, 2)}));
    }
    const RankRGram observed_truth = spec.noise_bound ? factored_gram_from_points(observed_points) : truth;
    const int n = static_cast<int>(points.n());

    auto omega = bernoulli_sample(n, spec.p, derive_seed(seed, 1));
    SampledDistances samples = observe(gram_from_points(observed_points), std::move(omega), spec.p);
    out.m = samples.m();
    const Problem prob = Problem::from_samples(std::move(samples), static_cast<int>(r));

    const RankRGram x0 = init_one_step(prob);
    out.init_error = relative_distance(x0, truth);
    const SolveResult res = dbre_solve(prob, x0, spec.solver, &truth);
    out.iterations = res.trace.iterations();
    out.status = std::string(to_string(res.trace.status));
    out.rel_error = relative_distance(res.x, truth);
    out.rel_error_observed = relative_distance(res.x, observed_truth);
    if (!std::isfinite(out.rel_error)) out.rel_error = kInf;
    out.success = out.rel_error <= spec.threshold;
  } catch (const Error& e) {
    out.status = std::string(to_string(e.kind()));
    out.success = false;
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double ExperimentConfig::effective_threshold() const {
  if (threshold) return *threshold;
  return gamma_grid.empty() ? 1e-3 : 1e-2;
}

void ExperimentConfig::validate() const {
  if (r_grid.empty()) throw Error(ErrorKind::invalid_input, "experiment: r grid is empty");
  if (rho_grid.empty() && p_grid.empty()) throw Error(ErrorKind::invalid_input, "experiment: rho and p grids are empty");
  if (trials < 1) throw Error(ErrorKind::invalid_input, "experiment: trials must be at least 1");
  if (!(effective_threshold() > 0.0)) throw Error(ErrorKind::invalid_input, "experiment: threshold must be positive");
  if (threads < 0) throw Error(ErrorKind::invalid_input, "experiment: negative thread count");
  for (const int r : r_grid) {
    if (r < 1 || r + 1 > dataset.n) throw Error(ErrorKind::invalid_input, "experiment: r outside [1, n - 1]");
  }
  for (const double p : p_grid) {
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "experiment: p outside (0, 1]");
  }
  for (const double rho : rho_grid) {
    if (!(rho > 0.0)) throw Error(ErrorKind::invalid_input, "experiment: rho must be positive");
  }
  solver.validate();
  if (dataset.kind == DatasetKind::file) throw Error(ErrorKind::invalid_input, "experiment: grids need a generator");
}

Json to_json(const ExperimentConfig& cfg) {
  Json j = {{"dataset", to_json(cfg.dataset)},
            {"r_grid", cfg.r_grid},
            {"rho_grid", cfg.rho_grid},
            {"p_grid", cfg.p_grid},
            {"gamma_grid", cfg.gamma_grid},
            {"trials", cfg.trials},
            {"threshold", cfg.effective_threshold()},
            {"seed", cfg.seed},
            {"solver", to_json(cfg.solver)}};
  return j;
}

ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig cfg) {
  try {
    if (j.contains("dataset")) cfg.dataset = dataset_spec_from_json(j["dataset"], cfg.dataset);
    cfg.r_grid = json_list<int>(j, "r_grid", cfg.r_grid);
    cfg.rho_grid = json_list<double>(j, "rho_grid", cfg.rho_grid);
    cfg.p_grid = json_list<double>(j, "p_grid", cfg.p_grid);
    cfg.gamma_grid = json_list<double>(j, "gamma_grid", cfg.gamma_grid);
    if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
    if (j.contains("threshold") && !j["threshold"].is_null()) cfg.threshold = j["threshold"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("solver")) cfg.solver = solver_config_from_json(j["solver"], cfg.solver);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::invalid_input, std::string("experiment config: ") + e.what());
  }
  return cfg;
}

std::vector<CellSpec> grid_cells(const ExperimentConfig& cfg) {
  std::vector<CellSpec> cells;
  std::vector<std::optional<double>> gammas;
  if (cfg.gamma_grid.empty()) gammas.push_back(std::nullopt);
  for (const double g : cfg.gamma_grid) gammas.emplace_back(g);
  for (const int r : cfg.r_grid) {
    const auto add = [&](std::optional<double> rho, double p) {
      for (const auto& g : gammas) cells.push_back({r, rho, p, g});
    };
    if (!cfg.rho_grid.empty()) {
      for (const double rho : cfg.rho_grid) add(rho, probability_for_ratio(cfg.dataset.n, r, rho));
    } else {
      for (const double p : cfg.p_grid) add(std::nullopt, p);
    }
  }
  return cells;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<CellResult> run_grid(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto cells = grid_cells(cfg);
  const auto trials = static_cast<std::size_t>(cfg.trials);
  std::vector<CellResult> out(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    out[c].cell = cells[c];
    out[c].trials.resize(trials);
  }

  const std::size_t tasks = cells.size() * trials;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t task = next++; task < tasks; task = next++) {
      const std::size_t c = task / trials;
      const std::size_t t = task % trials;
      TrialSpec spec;
      spec.dataset = cfg.dataset;
      spec.dataset.r = cells[c].r;
      spec.p = cells[c].p;
      if (cells[c].gamma) spec.noise_bound = std::pow(10.0, *cells[c].gamma);
      spec.solver = cfg.solver;
      spec.threshold = cfg.effective_threshold();
      out[c].trials[t] = run_trial(spec, cfg.seed + t);
    }
  };
  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(tasks, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (CellResult& cell : out) {
    std::vector<double> errors;
    std::vector<double> iters;
    std::size_t ok = 0;
    for (const TrialResult& t : cell.trials) {
      errors.push_back(t.rel_error);
      iters.push_back(t.iterations);
      ok += t.success;
      cell.wall_seconds += t.wall_seconds;
    }
    cell.success_fraction = static_cast<double>(ok) / static_cast<double>(cell.trials.size());
    cell.median_rel_error = median(errors);
    cell.median_iterations = median(iters);
  }
  return out;
}

namespace {

void write_optional(std::ostream& out, const std::optional<double>& v) {
  if (v) out << *v;
}

}  // namespace

void write_grid_csv(std::ostream& out, const ExperimentConfig& cfg, const std::vector<CellResult>& cells) {
  const std::string hash = config_hash(to_json(cfg));
  const std::string version = version_string();
  out << "cell,n,r,rho,p,gamma,noise_bound,trials,success_fraction,median_rel_error,median_iterations,"
         "wall_seconds,seed,config_hash,version\n";
  out << std::setprecision(17);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const CellResult& cell = cells[c];
    out << c << ',' << cfg.dataset.n << ',' << cell.cell.r << ',';
    write_optional(out, cell.cell.rho);
    out << ',' << cell.cell.p << ',';
    write_optional(out, cell.cell.gamma);
    out << ',';
    if (cell.cell.gamma) out << std::pow(10.0, *cell.cell.gamma);
    out << ',' << cell.trials.size() << ',' << cell.success_fraction << ',' << cell.median_rel_error << ','
        << cell.median_iterations << ',' << cell.wall_seconds << ',' << cfg.seed << ',' << hash << ',' << version
        << '\n';
  }
}

void write_trials_csv(std::ostream& out, const ExperimentConfig& cfg, const std::vector<CellResult>& cells) {
  const std::string hash = config_hash(to_json(cfg));
  const std::string version = version_string();
  out << "cell,trial,seed,r,rho,p,gamma,m,init_error,rel_error,rel_error_observed,iterations,status,success,"
         "wall_seconds,config_hash,version\n";
  out << std::setprecision(17);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const CellResult& cell = cells[c];
    for (std::size_t t = 0; t < cell.trials.size(); ++t) {
      const TrialResult& tr = cell.trials[t];
      out << c << ',' << t << ',' << tr.seed << ',' << cell.cell.r << ',';
      write_optional(out, cell.cell.rho);
      out << ',' << cell.cell.p << ',';
      write_optional(out, cell.cell.gamma);
      out << ',' << tr.m << ',' << tr.init_error << ',' << tr.rel_error << ',' << tr.rel_error_observed << ','
          << tr.iterations << ',' << tr.status << ',' << (tr.success ? 1 : 0) << ',' << tr.wall_seconds << ','
          << hash << ',' << version << '\n';
    }
  }
}

}  // namespace edmc
