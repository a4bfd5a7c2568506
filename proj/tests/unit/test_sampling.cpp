#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "edmc/error.hpp"
#include "edmc/sampling.hpp"

using namespace edmc;

TEST_CASE("Bernoulli sample is sorted, strict upper triangle and seeded") {
  const auto a = bernoulli_sample(50, 0.3, 9);
  const auto b = bernoulli_sample(50, 0.3, 9);
  const auto c = bernoulli_sample(50, 0.3, 10);
  CHECK(a == b);
  CHECK(a != c);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].i < a[k].j);
    CHECK(a[k].j < 50);
    if (k > 0) CHECK(a[k - 1] < a[k]);
  }
}

TEST_CASE("Bernoulli sample size concentrates around p L") {
  const int n = 400;
  const double p = 0.1;
  const double total = static_cast<double>(pair_count(n));
  const double m = static_cast<double>(bernoulli_sample(n, p, 3).size());
  CHECK(std::abs(m - p * total) <= 5.0 * std::sqrt(total * p * (1 - p)));
}

TEST_CASE("edge probabilities give empty and full samples") {
  CHECK(bernoulli_sample(10, 1.0, 1).size() == 45);
  CHECK(all_pairs(10).size() == 45);
  CHECK_THROWS_AS(bernoulli_sample(10, 1.5, 1), Error);
}

TEST_CASE("oversampling ratio and its inverse") {
  CHECK(oversampling_ratio(100, 3, 0.3) == doctest::Approx(0.3 * 4950.0 / 297.0));
  CHECK(probability_for_ratio(100, 3, 5.0) == doctest::Approx(0.3));
  CHECK_THROWS_AS(probability_for_ratio(10, 9, 5.0), Error);
}

TEST_CASE("sampled record validation") {
  SampledDistances s;
  s.n = 4;
  s.omega = {{0, 1}, {0, 2}};
  s.values = {1.0, 2.0};
  s.p = 0.5;
  CHECK_NOTHROW(s.validate());
  s.values = {1.0, -2.0};
  CHECK_THROWS_AS(s.validate(), Error);
  s.values = {1.0, 2.0};
  s.omega = {{0, 2}, {0, 1}};
  CHECK_THROWS_AS(s.validate(), Error);
  s.omega = {{0, 1}, {2, 4}};
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("samples round trip through CSV and sidecar") {
  Matrix x = Matrix::Zero(3, 3);
  x << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  SampledDistances s = observe(DenseSym(x), all_pairs(3), 1.0);
  s.seed = 42;
  CHECK(s.values[0] == doctest::Approx(6.0));
  const auto dir = std::filesystem::temp_directory_path() / "edmc_sampling_test";
  std::filesystem::create_directories(dir);
  write_samples(dir / "s.csv", dir / "s.json", s);
  const SampledDistances back = read_samples(dir / "s.csv", dir / "s.json");
  CHECK(back.n == 3);
  CHECK(back.omega == s.omega);
  CHECK(back.values == s.values);
  CHECK(back.p == 1.0);
  CHECK(back.seed == s.seed);
  std::filesystem::remove_all(dir);
}

TEST_CASE("noise perturbation respects its bound") {
  const PointCloud pts(Matrix::Zero(30, 3));
  const PointCloud noisy = perturb_points(pts, {0.01, 5});
  CHECK(noisy.coords().cwiseAbs().maxCoeff() <= 0.01);
  CHECK(noisy.coords().cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("child streams are distinct and reproducible") {
  Rng a(7);
  Rng b = a.split(1);
  Rng c = a.split(1);
  Rng d = a.split(2);
  const double x = b.uniform();
  CHECK(x == c.uniform());
  CHECK(x != d.uniform());
}
