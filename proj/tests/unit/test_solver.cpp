#include <doctest.h>

#include <random>
#include <sstream>

#include "edmc/error.hpp"
#include "edmc/solver.hpp"
#include "edmc/synthdata.hpp"
#include "oracle.hpp"

using namespace edmc;

namespace {

struct Setup {
  PointCloud points;
  RankRGram truth;
  Problem prob;
};

Setup make(int n, double p, std::uint64_t seed, std::vector<IndexPair> omega = {}) {
  Setup s;
  s.points = generate({DatasetKind::sphere_surface, n, 3, seed});
  s.truth = factored_gram_from_points(s.points);
  if (omega.empty()) omega = bernoulli_sample(n, p, seed + 100);
  s.prob = Problem::from_samples(observe(gram_from_points(s.points), std::move(omega), p), 3);
  return s;
}

}  // namespace

TEST_CASE("full sampling initializes exactly") {
  const Setup s = make(20, 1.0, 1, all_pairs(20));
  const RankRGram x0 = init_one_step(s.prob);
  CHECK(relative_distance(x0, s.truth) <= 1e-12);
}

TEST_CASE("full sampling solve stops after one record with zero error") {
  const Setup s = make(12, 1.0, 2, all_pairs(12));
  const SolveResult res = dbre_solve(s.prob, init_one_step(s.prob), {}, &s.truth);
  CHECK(res.trace.status == SolveStatus::converged);
  CHECK(res.trace.iterations() == 1);
  CHECK(*res.trace.final_truth_error() <= 1e-12);
}

TEST_CASE("empty sample set cannot be initialized") {
  Setup s = make(10, 0.5, 3);
  s.prob.data.omega.clear();
  s.prob.data.values.clear();
  bool thrown = false;
  try {
    init_one_step(s.prob);
  } catch (const Error& e) {
    thrown = e.kind() == ErrorKind::degenerate_init;
  }
  CHECK(thrown);
}

TEST_CASE("p is taken from the record, else from m / L") {
  SampledDistances d;
  d.n = 5;
  d.omega = {{0, 1}, {1, 2}};
  d.values = {1.0, 1.0};
  CHECK(Problem::from_samples(d, 1).p == doctest::Approx(0.2));
  d.p = 0.4;
  CHECK(Problem::from_samples(d, 1).p == doctest::Approx(0.4));
}

TEST_CASE("step size is one at full sampling with p = 1") {
  std::mt19937_64 rng(4);
  const Matrix u = oracle::random_centered_orthonormal(10, 2, rng);
  const RankRGram x(u, Vector::Constant(2, 2.0));
  const TangentVector g = project_tangent(x, oracle::random_s(10, rng));
  const auto omega = all_pairs(10);
  CHECK(step_size(g, omega, 1.0).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(step_size(g, omega, 1.0, 1.0 / 22.0, StepMode::rstar_r).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("step size is invariant under rescaling the direction") {
  std::mt19937_64 rng(5);
  const Matrix u = oracle::random_centered_orthonormal(15, 3, rng);
  const RankRGram x(u, Vector::Constant(3, 1.0));
  const TangentVector g = project_tangent(x, oracle::random_s(15, rng));
  const auto omega = bernoulli_sample(15, 0.8, 6);
  const double a = step_size(g, omega, 0.8, 1.0 / 22.0, StepMode::rstar_r).value;
  for (const double s : {1e-3, 0.7, 42.0}) {
    CHECK(step_size(g.scaled(s), omega, 0.8, 1.0 / 22.0, StepMode::rstar_r).value == doctest::Approx(a).epsilon(1e-12));
  }
}

TEST_CASE("zero direction is a degenerate step") {
  std::mt19937_64 rng(6);
  const RankRGram x(oracle::random_centered_orthonormal(6, 2, rng), Vector::Constant(2, 1.0));
  CHECK_THROWS_AS(step_size(TangentVector::zero(x), all_pairs(6), 1.0), Error);
}

TEST_CASE("exact quotient mode recovers at dense sampling") {
  const Setup s = make(60, 0.9, 7);
  const SolveResult res = dbre_solve(s.prob, init_one_step(s.prob), {}, &s.truth);
  CHECK(res.trace.status == SolveStatus::converged);
  CHECK(relative_distance(res.x, s.truth) <= 1e-4);
}

TEST_CASE("R*R mode recovers at moderate sampling") {
  const Setup s = make(100, 0.35, 8);
  SolverConfig cfg;
  cfg.step_mode = StepMode::rstar_r;
  const SolveResult res = dbre_solve(s.prob, init_one_step(s.prob), cfg, &s.truth);
  CHECK(res.trace.status == SolveStatus::converged);
  CHECK(relative_distance(res.x, s.truth) <= 1e-4);
}

TEST_CASE("solver is deterministic") {
  const Setup s = make(40, 0.8, 9);
  const RankRGram x0 = init_one_step(s.prob);
  const SolveResult a = dbre_solve(s.prob, x0, {}, &s.truth);
  const SolveResult b = dbre_solve(s.prob, x0, {}, &s.truth);
  std::ostringstream ta, tb;
  a.trace.write_jsonl(ta);
  b.trace.write_jsonl(tb);
  CHECK(ta.str() == tb.str());
  CHECK(a.x.eigenvalues() == b.x.eigenvalues());
}

TEST_CASE("trace ends with a summary line") {
  const Setup s = make(12, 1.0, 10, all_pairs(12));
  const SolveResult res = dbre_solve(s.prob, init_one_step(s.prob), {}, &s.truth);
  std::ostringstream out;
  res.trace.write_jsonl(out);
  CHECK(out.str().find("\"summary\":true") != std::string::npos);
}

TEST_CASE("mismatched start is rejected") {
  const Setup s = make(12, 1.0, 11, all_pairs(12));
  const Setup other = make(13, 1.0, 11, all_pairs(13));
  CHECK_THROWS_AS(dbre_solve(s.prob, other.truth, {}), Error);
}

TEST_CASE("invalid solver configuration is rejected") {
  SolverConfig cfg;
  cfg.step_epsilon = 0.3;
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK_THROWS_AS(step_mode_from_string("newton"), Error);
  CHECK(step_mode_from_string("exact-quotient") == StepMode::exact_quotient);
}

TEST_CASE("recovered points reproduce the Gram matrix") {
  const Setup s = make(25, 1.0, 12, all_pairs(25));
  const RecoveredPoints rec = recover_points(s.truth);
  CHECK_FALSE(rec.not_psd);
  CHECK(procrustes_error(rec.points, s.points) <= 1e-10);
}
