#pragma once

// Seeded recovery trials and the grids built from them.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "edmc/serialization.hpp"
#include "edmc/solver.hpp"
#include "edmc/synthdata.hpp"

namespace edmc {

struct TrialSpec {
  DatasetSpec dataset;  // seed and r are set per trial
  double p = 0.0;
  std::optional<double> noise_bound;
  SolverConfig solver;
  double threshold = 1e-3;
};

struct TrialResult {
  std::uint64_t seed = 0;
  std::size_t m = 0;
  double init_error = 0.0;   // ||X0 - X||_F / ||X||_F
  double rel_error = 0.0;    // against the clean truth
  double rel_error_observed = 0.0;  // against the Gram of the observed (noisy) points
  int iterations = 0;
  std::string status;
  bool success = false;
  double wall_seconds = 0.0;
};

// The point seed is the trial seed; sampling and noise use derived streams.
// Never throws for numerical failures; they come back as an unsuccessful
// trial with the failure kind in status.
TrialResult run_trial(const TrialSpec& spec, std::uint64_t seed);

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<int> r_grid;
  std::vector<double> rho_grid;    // used when non-empty
  std::vector<double> p_grid;      // used when rho_grid is empty
  std::vector<double> gamma_grid;  // noise bound 10^gamma; empty means noiseless
  int trials = 1;
  std::optional<double> threshold;  // default 1e-3 noiseless, 1e-2 with noise
  std::uint64_t seed = 0;
  SolverConfig solver;
  int threads = 0;  // 0 = hardware concurrency

  double effective_threshold() const;
  void validate() const;
};

Json to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const Json& j, ExperimentConfig base = {});

struct CellSpec {
  int r = 0;
  std::optional<double> rho;
  double p = 0.0;
  std::optional<double> gamma;
};

struct CellResult {
  CellSpec cell;
  std::vector<TrialResult> trials;
  double success_fraction = 0.0;
  double median_rel_error = 0.0;
  double median_iterations = 0.0;
  double wall_seconds = 0.0;
};

// Row-major over (r, rho or p, gamma).
std::vector<CellSpec> grid_cells(const ExperimentConfig& cfg);

// Trials run on a bounded worker pool and land in preassigned slots, so the
// result is independent of scheduling.
std::vector<CellResult> run_grid(const ExperimentConfig& cfg);

void write_grid_csv(std::ostream& out, const ExperimentConfig& cfg, const std::vector<CellResult>& cells);
void write_trials_csv(std::ostream& out, const ExperimentConfig& cfg, const std::vector<CellResult>& cells);

double median(std::vector<double> values);

}  // namespace edmc
