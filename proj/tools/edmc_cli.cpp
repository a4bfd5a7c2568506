// edmc: generate -> sample -> init -> solve -> diagnose pipelines and grid
// experiments. Every subcommand accepts --config FILE.json whose keys match
// the long flag names; flags given on the command line win.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "edmc/diagnostics.hpp"
#include "edmc/error.hpp"
#include "edmc/experiment.hpp"
#include "edmc/sampling.hpp"
#include "edmc/serialization.hpp"
#include "edmc/solver.hpp"
#include "edmc/synthdata.hpp"

namespace fs = std::filesystem;
using namespace edmc;

namespace {

// Flags registered on a subcommand together with how to read them from JSON.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON config; keys match the long flag names");
    app_->add_option("--out", out_dir_, "output directory")->required(false);
  }

  template <class T>
  CLI::Option* add(const std::string& name, T& target, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + name, target, help);
    setters_[name] = {opt, [&target](const Json& j) { target = j.get<T>(); }};
    return opt;
  }

  template <class T>
  CLI::Option* add(const std::string& name, std::optional<T>& target, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + name, target, help);
    setters_[name] = {opt, [&target](const Json& j) {
                        if (!j.is_null()) target = j.get<T>();
                      }};
    return opt;
  }

  // Config values for flags that were not given explicitly. Returns the
  // merged config as JSON for hashing.
  Json merge() {
    Json config = Json::object();
    if (!config_path_.empty()) config = read_json_file(config_path_);
    for (auto& [name, entry] : setters_) {
      if (entry.option->count() == 0 && config.contains(name)) {
        try {
          entry.set(config[name]);
        } catch (const Json::exception& e) {
          throw Error(ErrorKind::invalid_input, "config key '" + name + "': " + e.what());
        }
      }
    }
    if (out_dir_.empty() && config.contains("out")) out_dir_ = config["out"].get<std::string>();
    if (out_dir_.empty()) out_dir_ = ".";
    return config;
  }

  const fs::path& out_dir() const { return out_dir_; }
  fs::path out(const std::string& name) const { return out_dir_ / name; }

 private:
  struct Entry {
    CLI::Option* option;
    std::function<void(const Json&)> set;
  };
  CLI::App* app_;
  std::string config_path_;
  fs::path out_dir_;
  std::map<std::string, Entry> setters_;
};

Json provenance(const Json& effective, std::optional<std::uint64_t> seed) {
  Json meta = {{"config_hash", config_hash(effective)}, {"version", version_string()}};
  meta["seed"] = seed ? Json(*seed) : Json(nullptr);
  return meta;
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
}

void write_error(fs::path dir, std::string_view kind, const std::string& message) {
  if (dir.empty()) dir = ".";
  const Json err = {{"error", std::string(kind)}, {"message", message}, {"version", version_string()}};
  std::cerr << err.dump() << '\n';
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(dir / "error.json");
  if (out) out << err.dump(2) << '\n';
}

SampledDistances load_samples(const std::string& csv, std::string sidecar) {
  if (sidecar.empty()) sidecar = fs::path(csv).replace_extension(".json").string();
  return read_samples(csv, sidecar);
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string kind = "sphere_surface";
  int n = 100;
  int r = 3;
  std::uint64_t seed = 0;
  double swiss_turns = 1.5;
  double swiss_height = 21.0;
  std::string path;
};

void cmd_generate(Options& opts, GenerateArgs& a) {
  const Json cfg_in = opts.merge();
  DatasetSpec spec;
  spec.kind = dataset_kind_from_string(a.kind);
  spec.n = a.n;
  spec.r = a.r;
  spec.seed = a.seed;
  spec.swiss_turns = a.swiss_turns;
  spec.swiss_height = a.swiss_height;
  spec.path = a.path;
  const PointCloud points = generate(spec);
  prepare_dir(opts.out_dir());
  write_points_csv(opts.out("points.csv"), points);
  const Json effective = to_json(spec);
  Json meta = {{"dataset", effective}, {"n", points.n()}, {"r", points.r()}};
  meta.update(provenance(effective, spec.seed));
  write_json_file(opts.out("points.json"), meta);
}

// ------------------------------------------------------------------ sample

struct SampleArgs {
  std::string points;
  double p = 0.1;
  std::uint64_t seed = 0;
  std::optional<double> noise_bound;
  std::uint64_t noise_seed = 1;
};

void cmd_sample(Options& opts, SampleArgs& a) {
  opts.merge();
  if (a.points.empty()) throw Error(ErrorKind::invalid_input, "sample: --points is required");
  PointCloud points = center_points(read_points_csv(a.points));
  if (a.noise_bound) points = center_points(perturb_points(points, {*a.noise_bound, a.noise_seed}));
  auto omega = bernoulli_sample(static_cast<int>(points.n()), a.p, a.seed);
  SampledDistances samples = observe(gram_from_points(points), std::move(omega), a.p);
  samples.seed = a.seed;
  prepare_dir(opts.out_dir());
  write_samples(opts.out("samples.csv"), opts.out("samples.json"), samples);

  Json effective = {{"points", a.points}, {"p", a.p}, {"seed", a.seed}, {"noise_seed", a.noise_seed}};
  effective["noise_bound"] = a.noise_bound ? Json(*a.noise_bound) : Json(nullptr);
  Json side = read_json_file(opts.out("samples.json"));
  side.update(provenance(effective, a.seed));
  write_json_file(opts.out("samples.json"), side);
}

// -------------------------------------------------------------------- init

struct InitArgs {
  std::string samples;
  std::string sidecar;
  int r = 3;
};

void cmd_init(Options& opts, InitArgs& a) {
  opts.merge();
  const Problem prob = Problem::from_samples(load_samples(a.samples, a.sidecar), a.r);
  const RankRGram x0 = init_one_step(prob);
  prepare_dir(opts.out_dir());
  Json j = to_json(x0);
  const Json effective = {{"samples", a.samples}, {"r", a.r}, {"p", prob.p}};
  j["p"] = prob.p;
  j.update(provenance(effective, prob.data.seed));
  write_json_file(opts.out("init.json"), j);
}

// ------------------------------------------------------------------- solve

struct SolveArgs {
  std::string samples;
  std::string sidecar;
  int r = 3;
  std::string init;
  std::string truth;
  int max_iters = 1000;
  double tol = 1e-5;
  std::string step_mode = "exact_quotient";
};

void cmd_solve(Options& opts, SolveArgs& a) {
  opts.merge();
  const Problem prob = Problem::from_samples(load_samples(a.samples, a.sidecar), a.r);
  SolverConfig cfg;
  cfg.max_iters = a.max_iters;
  cfg.rel_change_tol = a.tol;
  cfg.step_mode = step_mode_from_string(a.step_mode);

  const auto start = std::chrono::steady_clock::now();
  const RankRGram x0 = a.init.empty() ? init_one_step(prob) : rank_r_gram_from_json(read_json_file(a.init));
  std::optional<RankRGram> truth;
  if (!a.truth.empty()) truth = factored_gram_from_points(center_points(read_points_csv(a.truth)));
  const SolveResult res = dbre_solve(prob, x0, cfg, truth ? &*truth : nullptr);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json effective = {{"samples", a.samples}, {"r", a.r}, {"p", prob.p}, {"solver", to_json(cfg)}};
  effective["init"] = a.init;
  effective["truth"] = a.truth;
  const Json meta = provenance(effective, prob.data.seed);

  prepare_dir(opts.out_dir());
  {
    std::ofstream trace(opts.out("trace.jsonl"));
    if (!trace) throw Error(ErrorKind::io, "cannot write trace.jsonl");
    trace << Json{{"meta", meta}}.dump() << '\n';
    res.trace.write_jsonl(trace);
  }
  Json sol = to_json(res.x);
  sol.update(meta);
  write_json_file(opts.out("solution.json"), sol);

  const RecoveredPoints rec = recover_points(res.x);
  write_points_csv(opts.out("recovered_points.csv"), rec.points);

  Json summary = {{"status", std::string(to_string(res.trace.status))},
                  {"detail", res.trace.detail},
                  {"iterations", res.trace.iterations()},
                  {"n", prob.data.n},
                  {"m", prob.data.m()},
                  {"p", prob.p},
                  {"r", prob.r},
                  {"wall_seconds", seconds},
                  {"points_clamped", rec.clamped},
                  {"not_psd", rec.not_psd}};
  const auto final_err = res.trace.final_truth_error();
  summary["rel_error"] = final_err ? json_number(*final_err) : Json(nullptr);
  summary["initial_rel_error"] =
      res.trace.initial_truth_error ? json_number(*res.trace.initial_truth_error) : Json(nullptr);
  if (truth) {
    const RecoveredPoints truth_points = recover_points(*truth);
    summary["procrustes_error"] = json_number(procrustes_error(rec.points, truth_points.points));
  }
  summary.update(meta);
  write_json_file(opts.out("summary.json"), summary);
  std::cout << summary.dump(2) << '\n';
  if (res.trace.status != SolveStatus::converged && res.trace.status != SolveStatus::max_iters) {
    throw Error(res.trace.status == SolveStatus::degenerate_iterate ? ErrorKind::degenerate_iterate
                                                                     : ErrorKind::degenerate_step,
                "solve ended with status " + std::string(to_string(res.trace.status)) + ": " + res.trace.detail);
  }
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseArgs {
  std::string gram;
  std::string points;
  std::string samples;
  std::string sidecar;
  std::optional<double> p;
  bool cross_terms = true;
  std::uint64_t seed = 0;
};

void cmd_diagnose(Options& opts, DiagnoseArgs& a) {
  opts.merge();
  if (a.gram.empty() == a.points.empty()) {
    throw Error(ErrorKind::invalid_input, "diagnose: give exactly one of --gram or --points");
  }
  const RankRGram x = a.gram.empty() ? factored_gram_from_points(center_points(read_points_csv(a.points)))
                                     : rank_r_gram_from_json(read_json_file(a.gram));
  const CoherenceReport rep = incoherence_nu(x, a.cross_terms);
  Json out = to_json(rep);
  out["pairwise_sum"] = pairwise_sum_identity_check(x);
  out["htilde_lambda_max"] = htilde_lambda_max(x);
  if (!a.samples.empty()) {
    const SampledDistances samples = load_samples(a.samples, a.sidecar);
    const double p = a.p ? *a.p : Problem::from_samples(samples, static_cast<int>(x.rank())).p;
    RipOptions ro;
    ro.seed = a.seed;
    out["rip"] = to_json(rip_estimate(x, samples.omega, p, ro));
    out["rip"]["p"] = p;
  }
  Json effective = {{"gram", a.gram}, {"points", a.points}, {"samples", a.samples}, {"seed", a.seed}};
  out.update(provenance(effective, a.seed));
  prepare_dir(opts.out_dir());
  write_json_file(opts.out("coherence.json"), out);
  std::cout << out.dump(2) << '\n';
}

// -------------------------------------------------------------------- grid

struct GridArgs {
  std::string kind = "sphere_surface";
  int n = 100;
  std::vector<int> r_grid;
  std::vector<double> rho_grid;
  std::vector<double> p_grid;
  std::vector<double> gamma_grid;
  int trials = 20;
  std::optional<double> threshold;
  std::uint64_t seed = 0;
  int threads = 0;
  int max_iters = 1000;
  double tol = 1e-5;
  std::string step_mode = "exact_quotient";
};

void cmd_grid(Options& opts, GridArgs& a) {
  opts.merge();
  ExperimentConfig cfg;
  cfg.dataset.kind = dataset_kind_from_string(a.kind);
  cfg.dataset.n = a.n;
  cfg.r_grid = a.r_grid;
  cfg.rho_grid = a.rho_grid;
  cfg.p_grid = a.p_grid;
  cfg.gamma_grid = a.gamma_grid;
  cfg.trials = a.trials;
  cfg.threshold = a.threshold;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  cfg.solver.max_iters = a.max_iters;
  cfg.solver.rel_change_tol = a.tol;
  cfg.solver.step_mode = step_mode_from_string(a.step_mode);

  const auto cells = run_grid(cfg);
  prepare_dir(opts.out_dir());
  {
    std::ofstream out(opts.out("grid.csv"));
    if (!out) throw Error(ErrorKind::io, "cannot write grid.csv");
    write_grid_csv(out, cfg, cells);
  }
  {
    std::ofstream out(opts.out("trials.csv"));
    if (!out) throw Error(ErrorKind::io, "cannot write trials.csv");
    write_trials_csv(out, cfg, cells);
  }
  Json meta = {{"config", to_json(cfg)}, {"cells", cells.size()}};
  meta.update(provenance(to_json(cfg), cfg.seed));
  write_json_file(opts.out("grid.json"), meta);
  write_grid_csv(std::cout, cfg, cells);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euclidean distance matrix completion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_string());

  auto* gen = app.add_subcommand("generate", "synthetic point cloud -> points.csv");
  Options gen_opts(gen);
  GenerateArgs ga;
  gen_opts.add("kind", ga.kind, "sphere_surface | swiss_roll | unit_ball_uniform | file");
  gen_opts.add("n", ga.n, "number of points");
  gen_opts.add("r", ga.r, "ambient dimension");
  gen_opts.add("seed", ga.seed, "RNG seed");
  gen_opts.add("swiss_turns", ga.swiss_turns, "swiss roll turns");
  gen_opts.add("swiss_height", ga.swiss_height, "swiss roll height");
  gen_opts.add("path", ga.path, "point CSV for the file kind");

  auto* smp = app.add_subcommand("sample", "Bernoulli sample of squared distances -> samples.csv/json");
  Options smp_opts(smp);
  SampleArgs sa;
  smp_opts.add("points", sa.points, "point CSV");
  smp_opts.add("p", sa.p, "Bernoulli parameter");
  smp_opts.add("seed", sa.seed, "sampling seed");
  smp_opts.add("noise_bound", sa.noise_bound, "perturb points by uniform noise on [-b, b]");
  smp_opts.add("noise_seed", sa.noise_seed, "noise seed");

  auto* ini = app.add_subcommand("init", "one-step hard-thresholding start -> init.json");
  Options ini_opts(ini);
  InitArgs ia;
  ini_opts.add("samples", ia.samples, "samples CSV");
  ini_opts.add("sidecar", ia.sidecar, "samples JSON sidecar (default: CSV path with .json)");
  ini_opts.add("r", ia.r, "target rank");

  auto* slv = app.add_subcommand("solve", "run the solver -> trace.jsonl, solution.json, summary.json");
  Options slv_opts(slv);
  SolveArgs va;
  slv_opts.add("samples", va.samples, "samples CSV");
  slv_opts.add("sidecar", va.sidecar, "samples JSON sidecar");
  slv_opts.add("r", va.r, "target rank");
  slv_opts.add("init", va.init, "factored Gram JSON to start from (default: one-step init)");
  slv_opts.add("truth", va.truth, "ground-truth point CSV for error tracking");
  slv_opts.add("max_iters", va.max_iters, "iteration cap");
  slv_opts.add("tol", va.tol, "relative change tolerance");
  slv_opts.add("step_mode", va.step_mode, "exact_quotient or rstar_r");

  auto* dia = app.add_subcommand("diagnose", "incoherence and RIP diagnostics -> coherence.json");
  Options dia_opts(dia);
  DiagnoseArgs da;
  dia_opts.add("gram", da.gram, "factored Gram JSON");
  dia_opts.add("points", da.points, "point CSV");
  dia_opts.add("samples", da.samples, "samples CSV for the RIP estimate");
  dia_opts.add("sidecar", da.sidecar, "samples JSON sidecar");
  dia_opts.add("p", da.p, "Bernoulli parameter for the RIP estimate");
  dia_opts.add("cross_terms", da.cross_terms, "scan cross-term coherence (O(n^3 r))");
  dia_opts.add("seed", da.seed, "power-iteration start seed");

  auto* grd = app.add_subcommand("grid", "recovery grid -> grid.csv, trials.csv");
  Options grd_opts(grd);
  GridArgs gr;
  grd_opts.add("kind", gr.kind, "dataset kind");
  grd_opts.add("n", gr.n, "number of points");
  grd_opts.add("r_grid", gr.r_grid, "ranks")->expected(0, -1);
  grd_opts.add("rho_grid", gr.rho_grid, "oversampling ratios")->expected(0, -1);
  grd_opts.add("p_grid", gr.p_grid, "Bernoulli parameters (when no rho grid)")->expected(0, -1);
  grd_opts.add("gamma_grid", gr.gamma_grid, "noise exponents; bound = 10^gamma")->expected(0, -1);
  grd_opts.add("trials", gr.trials, "trials per cell");
  grd_opts.add("threshold", gr.threshold, "success threshold on relative Gram error");
  grd_opts.add("seed", gr.seed, "base seed; trial t uses seed + t");
  grd_opts.add("threads", gr.threads, "worker threads (0 = all cores)");
  grd_opts.add("max_iters", gr.max_iters, "solver iteration cap");
  grd_opts.add("tol", gr.tol, "solver relative change tolerance");
  grd_opts.add("step_mode", gr.step_mode, "exact_quotient or rstar_r");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  Options* active = nullptr;
  try {
    if (*gen) {
      active = &gen_opts;
      cmd_generate(gen_opts, ga);
    } else if (*smp) {
      active = &smp_opts;
      cmd_sample(smp_opts, sa);
    } else if (*ini) {
      active = &ini_opts;
      cmd_init(ini_opts, ia);
    } else if (*slv) {
      active = &slv_opts;
      cmd_solve(slv_opts, va);
    } else if (*dia) {
      active = &dia_opts;
      cmd_diagnose(dia_opts, da);
    } else if (*grd) {
      active = &grd_opts;
      cmd_grid(grd_opts, gr);
    }
  } catch (const Error& e) {
    write_error(active ? active->out_dir() : fs::path("."), to_string(e.kind()), e.what());
    return 2;
  } catch (const std::exception& e) {
    write_error(active ? active->out_dir() : fs::path("."), "internal", e.what());
    return 3;
  }
  return 0;
}
