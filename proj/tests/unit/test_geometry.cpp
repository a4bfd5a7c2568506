#include <doctest.h>

#include <random>
#include <sstream>

#include "edmc/error.hpp"
#include "edmc/geometry.hpp"
#include "oracle.hpp"

using namespace edmc;

namespace {

PointCloud random_cloud(int n, int r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix p(n, r);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < r; ++k) p(i, k) = normal(rng);
  return center_points(PointCloud(p));
}

}  // namespace

TEST_CASE("gram and distance conversions invert each other") {
  const PointCloud pts = random_cloud(12, 3, 1);
  const DenseSym x = gram_from_points(pts);
  const DenseSym d = distances_from_gram(x);
  for (Index i = 0; i < 12; ++i) {
    CHECK(d(i, i) == 0.0);
    for (Index j = 0; j < 12; ++j) {
      CHECK(d(i, j) == d(j, i));
      CHECK(d(i, j) == doctest::Approx((pts.coords().row(i) - pts.coords().row(j)).squaredNorm()).epsilon(1e-12));
    }
  }
  const DenseSym back = gram_from_distances(d);
  CHECK((back.matrix() - x.matrix()).norm() <= 1e-12 * x.matrix().norm());
  CHECK((x.matrix() * Vector::Ones(12)).norm() <= 1e-12 * x.matrix().norm());
}

TEST_CASE("classical MDS recovers a configuration up to rigid motion") {
  const PointCloud pts = random_cloud(20, 2, 2);
  const PointCloud rec = classical_mds(distances_from_gram(gram_from_points(pts)), 2);
  CHECK(procrustes_error(rec, pts) <= 1e-10 * pts.coords().norm());
}

TEST_CASE("classical MDS rejects a non-Euclidean matrix") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 1) = d(1, 0) = 1.0;
  d(1, 2) = d(2, 1) = 1.0;
  d(0, 2) = d(2, 0) = 9.0;  // violates the triangle inequality on distances
  bool thrown = false;
  try {
    classical_mds(DenseSym(d), 2);
  } catch (const Error& e) {
    thrown = e.kind() == ErrorKind::not_embeddable;
  }
  CHECK(thrown);
}

TEST_CASE("factored Gram matches the dense Gram") {
  const PointCloud pts = random_cloud(15, 3, 3);
  const RankRGram x = factored_gram_from_points(pts);
  CHECK(x.rank() == 3);
  CHECK((x.dense() - gram_from_points(pts).matrix()).norm() <= 1e-12 * x.frobenius_norm());
  CHECK(x.orthonormality_defect() <= 1e-12);
  CHECK(x.centering_defect() <= 1e-12);
}

TEST_CASE("factored Gram drops a degenerate direction") {
  Matrix p = random_cloud(10, 2, 4).coords();
  Matrix q(10, 3);
  q << p, Matrix::Zero(10, 1);
  CHECK(factored_gram_from_points(PointCloud(q, true)).rank() == 2);
}

TEST_CASE("relative distance agrees with the dense computation") {
  const RankRGram a = factored_gram_from_points(random_cloud(9, 2, 5));
  const RankRGram b = factored_gram_from_points(random_cloud(9, 3, 6));
  const double dense = (a.dense() - b.dense()).norm() / b.dense().norm();
  CHECK(relative_distance(a, b) == doctest::Approx(dense).epsilon(1e-12));
  CHECK(relative_distance(b, b) <= 1e-14);
}

TEST_CASE("magnitude order breaks ties by sign then index") {
  Vector v(5);
  v << 1.0, -3.0, 3.0, 0.5, -1.0;
  const auto order = magnitude_order(v);
  CHECK(order == std::vector<Index>{2, 1, 0, 4, 3});
}

TEST_CASE("point CSV round trip keeps full precision") {
  const PointCloud pts = random_cloud(7, 3, 7);
  std::stringstream ss;
  write_points_csv(ss, pts);
  const PointCloud back = read_points_csv(ss);
  CHECK(back.coords() == pts.coords());
}

TEST_CASE("malformed point CSV is rejected") {
  std::stringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(read_points_csv(ragged), Error);
  std::stringstream empty("x,y\n");
  CHECK_THROWS_AS(read_points_csv(empty), Error);
}

TEST_CASE("pairwise distances of a centered orthonormal basis sum to n r") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + trial;
    const int r = 1 + trial % 4;
    const Matrix u = oracle::random_centered_orthonormal(n, r, rng);
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) sum += (u.row(i) - u.row(j)).squaredNorm();
    CHECK(sum == doctest::Approx(static_cast<double>(n * r)).epsilon(1e-12));
  }
}
