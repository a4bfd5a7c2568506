#pragma once

// Riemannian gradient descent on rank-r Gram matrices with the de-biased
// sampling operator M_Omega, and the one-step hard-thresholding start.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edmc/geometry.hpp"
#include "edmc/manifold.hpp"
#include "edmc/sampling.hpp"

namespace edmc {

struct Problem {
  SampledDistances data;
  double p = 0.0;
  int r = 0;

  // p from the sampling record when it is positive, else m / L.
  static Problem from_samples(SampledDistances data, int r);
  void validate() const;
};

// exact_quotient: gradient M_Omega(X - X_l) with step ||P_T G||^2 / <P_T G, M_Omega P_T G>.
// rstar_r: the same iteration with the undebiased R*_Omega R_Omega in both places.
enum class StepMode { exact_quotient, rstar_r };

std::string_view to_string(StepMode m);
StepMode step_mode_from_string(std::string_view s);

struct SolverConfig {
  int max_iters = 1000;
  double rel_change_tol = 1e-5;
  double step_epsilon = 1.0 / 22.0;
  // Abort when the error against the truth exceeds this multiple of the
  // initial error.
  double divergence_factor = 1e3;
  StepMode step_mode = StepMode::exact_quotient;

  void validate() const;
};

enum class SolveStatus { converged, max_iters, degenerate_step, degenerate_iterate, diverged };

std::string_view to_string(SolveStatus s);

struct IterationRecord {
  int iter = 0;
  double step_size = 0.0;
  bool step_within_bounds = true;
  double residual_norm = 0.0;  // ||(d_a - <X_l, w_a>)_a||_2 over Omega
  double gradient_norm = 0.0;  // ||P_T G_l||_F
  double rel_change = 0.0;
  std::optional<double> rel_truth_error;
};

struct SolverTrace {
  std::vector<IterationRecord> records;
  SolveStatus status = SolveStatus::max_iters;
  std::string detail;
  std::optional<double> initial_truth_error;

  int iterations() const { return static_cast<int>(records.size()); }
  std::optional<double> final_truth_error() const;

  // One JSON object per iteration followed by a summary object.
  void write_jsonl(std::ostream& out) const;
};

struct SolveResult {
  RankRGram x;
  SolverTrace trace;
};

// X0 = (1/p) H_r(R_Omega(X)). Throws degenerate_init on empty Omega or when
// R_Omega(X) has numerical rank below r.
RankRGram init_one_step(const Problem& prob);

struct StepSize {
  double value = 0.0;
  double lower = 0.0;  // p^-2 / (1 + 4 eps)
  double upper = 0.0;  // p^-2 / (1 - 4 eps)
  bool within_bounds = true;
};

// ||g||^2 / <g, M_Omega g> (or <g, R*R g> in rstar_r mode). Throws
// degenerate_step when either is not positive.
StepSize step_size(const TangentVector& g, std::span<const IndexPair> omega, double p,
                   double epsilon = 1.0 / 22.0, StepMode mode = StepMode::exact_quotient);

// Degenerate steps, rank collapse and divergence end the run with the
// corresponding status instead of throwing, so the partial trace survives.
SolveResult dbre_solve(const Problem& prob, const RankRGram& x0, const SolverConfig& cfg,
                       const RankRGram* truth = nullptr);

struct RecoveredPoints {
  PointCloud points;
  bool clamped = false;     // some eigenvalue was negative and set to 0
  bool not_psd = false;     // an eigenvalue was below -1e-8 |lambda_1|
  double min_eigenvalue = 0.0;
};

RecoveredPoints recover_points(const RankRGram& x);

}  // namespace edmc
