#include "edmc/solver.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include <json.hpp>

#include "edmc/dualbasis.hpp"
#include "edmc/error.hpp"

namespace edmc {

Problem Problem::from_samples(SampledDistances data, int r) {
  Problem prob;
  const auto total = pair_count(data.n);
  prob.p = data.p > 0.0 ? data.p
                        : (total > 0 ? static_cast<double>(data.m()) / static_cast<double>(total) : 0.0);
  prob.data = std::move(data);
  prob.r = r;
  return prob;
}

void Problem::validate() const {
  data.validate();
  if (r < 1) throw Error(ErrorKind::invalid_input, "problem: rank must be at least 1");
  if (r > data.n) throw Error(ErrorKind::invalid_input, "problem: rank exceeds n");
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "problem: p must lie in (0, 1]");
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw Error(ErrorKind::invalid_input, "solver: max_iters must be at least 1");
  if (!(rel_change_tol > 0.0)) throw Error(ErrorKind::invalid_input, "solver: tolerance must be positive");
  if (!(step_epsilon > 0.0 && step_epsilon < 0.25)) {
    throw Error(ErrorKind::invalid_input, "solver: step epsilon must lie in (0, 1/4)");
  }
  if (!(divergence_factor > 0.0)) throw Error(ErrorKind::invalid_input, "solver: divergence factor must be positive");
}

std::string_view to_string(StepMode m) {
  return m == StepMode::rstar_r ? "rstar_r" : "exact_quotient";
}

StepMode step_mode_from_string(std::string_view s) {
  if (s == "exact_quotient" || s == "exact-quotient") return StepMode::exact_quotient;
  if (s == "rstar_r") return StepMode::rstar_r;
  throw Error(ErrorKind::invalid_input, "unknown step mode '" + std::string(s) + "'");
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::degenerate_step: return "degenerate_step";
    case SolveStatus::degenerate_iterate: return "degenerate_iterate";
    case SolveStatus::diverged: return "diverged";
  }
  return "unknown";
}

std::optional<double> SolverTrace::final_truth_error() const {
  if (records.empty()) return initial_truth_error;
  return records.back().rel_truth_error;
}

void SolverTrace::write_jsonl(std::ostream& out) const {
  const auto number = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  for (const IterationRecord& rec : records) {
    nlohmann::json j = {{"iter", rec.iter},
                        {"step_size", number(rec.step_size)},
                        {"step_within_bounds", rec.step_within_bounds},
                        {"residual_norm", number(rec.residual_norm)},
                        {"gradient_norm", number(rec.gradient_norm)},
                        {"rel_change", number(rec.rel_change)}};
    j["rel_truth_error"] = rec.rel_truth_error ? number(*rec.rel_truth_error) : nlohmann::json(nullptr);
    out << j.dump() << '\n';
  }
  nlohmann::json summary = {{"summary", true},
                            {"status", std::string(to_string(status))},
                            {"iterations", iterations()},
                            {"detail", detail}};
  summary["initial_truth_error"] = initial_truth_error ? number(*initial_truth_error) : nlohmann::json(nullptr);
  const auto last = final_truth_error();
  summary["final_truth_error"] = last ? number(*last) : nlohmann::json(nullptr);
  out << summary.dump() << '\n';
}

RankRGram init_one_step(const Problem& prob) {
  prob.validate();
  if (prob.data.m() == 0) throw Error(ErrorKind::degenerate_init, "initialization: no observed distances");
  const DenseSym r_omega = r_omega_operator(prob.data).dense();
  const ThresholdResult th = hard_threshold(r_omega.matrix(), prob.r);
  if (th.gram.rank() < prob.r) {
    throw Error(ErrorKind::degenerate_init, "initialization: R_Omega(X) has numerical rank " +
                                                std::to_string(th.numerical_rank) + " < " +
                                                std::to_string(prob.r));
  }
  return RankRGram(th.gram.basis(), th.gram.eigenvalues() / prob.p);
}

StepSize step_size(const TangentVector& g, std::span<const IndexPair> omega, double p, double epsilon,
                   StepMode mode) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "step_size: p must lie in (0, 1]");
  const double num = g.norm_sq();
  if (!(num > 0.0)) throw Error(ErrorKind::degenerate_step, "step size: zero search direction");
  const auto coeffs = g.coefficients(omega);
  const int n = static_cast<int>(g.base().n());
  const double den = mode == StepMode::rstar_r ? m_omega_quadratic_form(n, omega, coeffs, 1.0)
                                               : m_omega_quadratic_form(n, omega, coeffs, p);
  if (!(den > 0.0) || !std::isfinite(den)) {
    throw Error(ErrorKind::degenerate_step, "step size: non-positive curvature <g, M_Omega g>");
  }
  StepSize out;
  out.value = num / den;
  const double inv_p2 = 1.0 / (p * p);
  out.lower = inv_p2 / (1.0 + 4.0 * epsilon);
  out.upper = inv_p2 / (1.0 - 4.0 * epsilon);
  out.within_bounds = out.value >= out.lower && out.value <= out.upper;
  return out;
}

SolveResult dbre_solve(const Problem& prob, const RankRGram& x0, const SolverConfig& cfg, const RankRGram* truth) {
  prob.validate();
  cfg.validate();
  if (x0.n() != prob.data.n || x0.rank() != prob.r) {
    throw Error(ErrorKind::shape_mismatch, "solver: initial iterate does not match the problem");
  }
  if (truth && truth->n() != prob.data.n) throw Error(ErrorKind::shape_mismatch, "solver: truth dimension mismatch");

  const int n = prob.data.n;
  const auto& omega = prob.data.omega;
  const auto& observed = prob.data.values;

  SolveResult out{x0, {}};
  SolverTrace& trace = out.trace;
  if (truth) trace.initial_truth_error = relative_distance(x0, *truth);

  std::vector<double> residual(omega.size());
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const RankRGram& x = out.x;
    const auto current = w_coefficients(x, omega);
    double residual_sq = 0.0;
    for (std::size_t k = 0; k < omega.size(); ++k) {
      residual[k] = observed[k] - current[k];
      residual_sq += residual[k] * residual[k];
    }

    const SparseSym g = cfg.step_mode == StepMode::rstar_r ? rstar_r_apply(n, omega, residual)
                                                           : m_omega_apply(n, omega, residual, prob.p);
    const TangentVector pg = project_tangent(x, g);

    IterationRecord rec;
    rec.iter = iter;
    rec.residual_norm = std::sqrt(residual_sq);
    rec.gradient_norm = pg.norm();

    const double scale = x.frobenius_norm();
    if (rec.gradient_norm <= 1e-13 * scale) {
      rec.rel_change = 0.0;
      rec.step_size = 0.0;
      if (truth) rec.rel_truth_error = relative_distance(x, *truth);
      trace.records.push_back(rec);
      trace.status = SolveStatus::converged;
      trace.detail = "projected gradient vanished";
      return out;
    }

    StepSize step;
    RetractionResult next;
    try {
      step = step_size(pg, omega, prob.p, cfg.step_epsilon, cfg.step_mode);
      next = retract_structured(x, pg, step.value);
    } catch (const Error& e) {
      trace.status = e.kind() == ErrorKind::degenerate_iterate ? SolveStatus::degenerate_iterate
                                                                : SolveStatus::degenerate_step;
      trace.detail = e.what();
      return out;
    }
    rec.step_size = step.value;
    rec.step_within_bounds = step.within_bounds;
    rec.rel_change = next.change_norm / scale;
    out.x = std::move(next.next);
    if (truth) rec.rel_truth_error = relative_distance(out.x, *truth);
    trace.records.push_back(rec);

    if (!std::isfinite(rec.rel_change) ||
        (rec.rel_truth_error && trace.initial_truth_error &&
         !(*rec.rel_truth_error <= cfg.divergence_factor * *trace.initial_truth_error))) {
      trace.status = SolveStatus::diverged;
      trace.detail = "error against the truth grew beyond the divergence guard";
      return out;
    }
    if (rec.rel_change < cfg.rel_change_tol) {
      trace.status = SolveStatus::converged;
      return out;
    }
  }
  trace.status = SolveStatus::max_iters;
  return out;
}

RecoveredPoints recover_points(const RankRGram& x) {
  RecoveredPoints out;
  const Index r = x.rank();
  Matrix coords(x.n(), r);
  const double lead = r > 0 ? std::abs(x.eigenvalues()(0)) : 0.0;
  out.min_eigenvalue = r > 0 ? x.eigenvalues().minCoeff() : 0.0;
  for (Index k = 0; k < r; ++k) {
    double lambda = x.eigenvalues()(k);
    if (lambda < 0.0) {
      out.clamped = true;
      if (lambda < -1e-8 * lead) out.not_psd = true;
      lambda = 0.0;
    }
    coords.col(k) = x.basis().col(k) * std::sqrt(lambda);
  }
  if (coords.rows() > 0) coords.rowwise() -= coords.colwise().mean();
  out.points = PointCloud(std::move(coords), true);
  return out;
}

}  // namespace edmc
