#include <doctest.h>

#include <random>

#include "edmc/dualbasis.hpp"
#include "edmc/error.hpp"
#include "oracle.hpp"

using namespace edmc;

namespace {

struct Instance {
  std::vector<IndexPair> omega;
  std::vector<int> positions;
  Matrix y;
  std::vector<double> coeffs;
};

Instance random_instance(const oracle::DualBasis& db, double p, std::mt19937_64& rng) {
  Instance out;
  std::bernoulli_distribution keep(p);
  // oracle::pairs enumerates column by column, so (i, j) sits at j (j - 1) / 2 + i.
  for (int i = 0; i < db.n; ++i)
    for (int j = i + 1; j < db.n; ++j) {
      if (!keep(rng)) continue;
      out.omega.push_back({i, j});
      out.positions.push_back(j * (j - 1) / 2 + i);
    }
  out.y = oracle::random_s(db.n, rng);
  out.coeffs = w_coefficients(out.y, out.omega);
  return out;
}

double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST_CASE("closed-form dual Gram entries match a numerical inverse") {
  for (int n = 2; n <= 7; ++n) {
    const oracle::DualBasis db(n);
    for (std::size_t a = 0; a < db.index.size(); ++a)
      for (std::size_t b = 0; b < db.index.size(); ++b) {
        const IndexPair pa{db.index[a].i, db.index[a].j};
        const IndexPair pb{db.index[b].i, db.index[b].j};
        CHECK(h_inverse_entry(n, pa, pb) == doctest::Approx(db.h_inv(a, b)).epsilon(1e-10).scale(1.0));
        CHECK(h_entry(pa, pb) == db.h(a, b));
      }
  }
}

TEST_CASE("frozen dual Gram values at n = 4") {
  CHECK(h_inverse_entry(4, {0, 1}, {0, 1}) == doctest::Approx(oracle::frozen::hinv4_same));
  CHECK(h_inverse_entry(4, {0, 1}, {1, 2}) == doctest::Approx(oracle::frozen::hinv4_adjacent));
  CHECK(h_inverse_entry(4, {0, 1}, {2, 3}) == doctest::Approx(oracle::frozen::hinv4_disjoint));
  CHECK(dual_basis_constants(5).v_norm_sq == doctest::Approx(oracle::frozen::v_norm_sq_n5));
}

TEST_CASE("spectral constants of H and its inverse") {
  for (int n = 2; n <= 8; ++n) {
    const oracle::DualBasis db(n);
    Eigen::SelfAdjointEigenSolver<Matrix> h(db.h), hinv(db.h_inv);
    const DualBasisConstants c = dual_basis_constants(n);
    CHECK(c.h_eig_max == doctest::Approx(h.eigenvalues().maxCoeff()).epsilon(1e-10));
    CHECK(c.hinv_eig_max == doctest::Approx(hinv.eigenvalues().maxCoeff()).epsilon(1e-10));
  }
  CHECK(dual_basis_constants(2).hinv_eig_max == doctest::Approx(oracle::frozen::hinv_max_n2));
  CHECK(dual_basis_constants(3).hinv_eig_max == doctest::Approx(oracle::frozen::hinv_max_n3));
  CHECK(dual_basis_constants(9).hinv_eig_max == doctest::Approx(oracle::frozen::hinv_max_large));
}

TEST_CASE("dense basis elements are biorthogonal") {
  const int n = 5;
  const auto pairs = all_pairs(n);
  for (const IndexPair& a : pairs)
    for (const IndexPair& b : pairs) {
      const double ip = w_alpha_dense(n, a).matrix().cwiseProduct(v_alpha_dense(n, b).matrix()).sum();
      CHECK(ip == doctest::Approx(a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("fast operators match the brute-force sums") {
  std::mt19937_64 rng(21);
  for (const int n : {3, 5, 7}) {
    const oracle::DualBasis db(n);
    for (int t = 0; t < 10; ++t) {
      const double p = 0.3 + 0.07 * t;
      const Instance in = random_instance(db, p, rng);
      if (in.omega.empty()) continue;
      CHECK(rel(f_omega_apply(n, in.omega, in.coeffs).dense(), oracle::f_omega(db, in.positions, in.y)) <= 1e-12);
      const SparseSym sampled = SparseSym::from_upper(n, in.omega, in.coeffs);
      CHECK(rel(r_omega_apply(sampled).matrix(), oracle::r_omega(db, in.positions, in.y)) <= 1e-12);
      CHECK(rel(rstar_r_apply(n, in.omega, in.coeffs).dense(), oracle::rstar_r(db, in.positions, in.y)) <= 1e-12);
      CHECK(rel(m_omega_apply(n, in.omega, in.coeffs, p).dense(), oracle::m_omega(db, in.positions, in.y, p)) <= 1e-12);
      const double q = oracle::inner(in.y, oracle::m_omega(db, in.positions, in.y, p));
      CHECK(m_omega_quadratic_form(n, in.omega, in.coeffs, p) == doctest::Approx(q).epsilon(1e-10));
    }
  }
}

TEST_CASE("centered sparse product matches its dense form") {
  std::mt19937_64 rng(5);
  const int n = 9;
  const auto omega = bernoulli_sample(n, 0.5, 3);
  std::vector<double> values(omega.size());
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  for (double& v : values) v = unif(rng);
  const CenteredSparse op(SparseSym::from_upper(n, omega, values));
  Matrix x = Matrix::Random(n, 3);
  CHECK(rel(op.apply(x), op.dense().matrix() * x) <= 1e-12);
  CHECK(rel(op.dense().matrix(), r_omega_apply(SparseSym::from_upper(n, omega, values)).matrix()) <= 1e-12);
}

TEST_CASE("R*R and M_Omega are self-adjoint") {
  std::mt19937_64 rng(8);
  const int n = 8;
  const auto omega = bernoulli_sample(n, 0.5, 1);
  const Matrix y = oracle::random_s(n, rng);
  const Matrix z = oracle::random_s(n, rng);
  const auto cy = w_coefficients(y, omega);
  const auto cz = w_coefficients(z, omega);
  const double lhs = m_omega_apply(n, omega, cy, 0.5).dense().cwiseProduct(z).sum();
  const double rhs = m_omega_apply(n, omega, cz, 0.5).dense().cwiseProduct(y).sum();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  const double l2 = rstar_r_apply(n, omega, cy).dense().cwiseProduct(z).sum();
  const double r2 = rstar_r_apply(n, omega, cz).dense().cwiseProduct(y).sum();
  CHECK(l2 == doctest::Approx(r2).epsilon(1e-12));
}

TEST_CASE("M_Omega is the identity times p^2 at full sampling with p = 1") {
  std::mt19937_64 rng(4);
  const int n = 6;
  const Matrix y = oracle::random_s(n, rng);
  const auto omega = all_pairs(n);
  CHECK(rel(m_omega_apply(n, omega, w_coefficients(y, omega), 1.0).dense(), y) <= 1e-12);
}

TEST_CASE("dense operator matrices agree with the oracle") {
  const int n = 5;
  const oracle::DualBasis db(n);
  std::mt19937_64 rng(2);
  const Instance in = random_instance(db, 0.6, rng);
  const Matrix op = dense_operator_matrix(SamplingOperator::m_omega, n, in.omega, 0.6);
  const Matrix y = in.y;
  const Eigen::Map<const Eigen::VectorXd> vy(y.data(), n * n);
  const Eigen::VectorXd image = op * vy;
  const Matrix expected = oracle::m_omega(db, in.positions, y, 0.6);
  CHECK((image - Eigen::Map<const Eigen::VectorXd>(expected.data(), n * n)).norm() <= 1e-12 * expected.norm());
  CHECK_THROWS_AS(dense_operator_matrix(SamplingOperator::f_omega, 21, in.omega, 0.5), Error);
}

TEST_CASE("sum of squared dual elements") {
  for (int n = 2; n <= 7; ++n) {
    const oracle::DualBasis db(n);
    Matrix acc = Matrix::Zero(n, n);
    for (const Matrix& v : db.v) acc += v * v;
    CHECK(rel(sum_v_squared(n).matrix(), acc) <= 1e-12);
  }
}

TEST_CASE("w coefficients of a factored Gram agree with the dense path") {
  std::mt19937_64 rng(3);
  const Matrix u = oracle::random_centered_orthonormal(10, 2, rng);
  Vector lambda(2);
  lambda << 3.0, -1.5;
  const RankRGram x(u, lambda);
  const auto omega = all_pairs(10);
  const auto fast = w_coefficients(x, omega);
  const auto dense = w_coefficients(x.dense(), omega);
  for (std::size_t k = 0; k < omega.size(); ++k) CHECK(fast[k] == doctest::Approx(dense[k]).epsilon(1e-12));
}
