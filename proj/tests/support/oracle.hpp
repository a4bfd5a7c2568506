#pragma once

// Brute-force references for the test suite. Nothing here calls the library's
// closed forms: the dual basis comes from a numerical inverse of the Gram
// matrix of {w_a}, and every operator is a literal double sum.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;

struct Pair {
  int i;
  int j;
};

std::vector<Pair> pairs(int n);

Matrix w(int n, const Pair& a);

// Dual basis of {w_a} obtained from the dense inverse of H = [<w_a, w_b>].
struct DualBasis {
  int n = 0;
  std::vector<Pair> index;
  std::vector<Matrix> w;
  std::vector<Matrix> v;
  Matrix h;
  Matrix h_inv;

  explicit DualBasis(int n);
};

double inner(const Matrix& a, const Matrix& b);

// Omega given as positions into DualBasis::index.
Matrix f_omega(const DualBasis& db, const std::vector<int>& omega, const Matrix& y);
Matrix r_omega(const DualBasis& db, const std::vector<int>& omega, const Matrix& y);
Matrix rstar_r(const DualBasis& db, const std::vector<int>& omega, const Matrix& y);
Matrix m_omega(const DualBasis& db, const std::vector<int>& omega, const Matrix& y, double p);

// Random symmetric matrix with zero row sums.
Matrix random_s(int n, std::mt19937_64& rng);

// Centered n x r matrix with orthonormal columns.
Matrix random_centered_orthonormal(int n, int r, std::mt19937_64& rng);

// Frozen values derived by hand (exact rationals).
namespace frozen {
// <v_a, v_b> at n = 4 for pairs sharing 2, 1, 0 indices.
inline constexpr double hinv4_same = 5.0 / 16.0;
inline constexpr double hinv4_adjacent = -1.0 / 16.0;
inline constexpr double hinv4_disjoint = 1.0 / 16.0;
// lambda_max(H^{-1}) for n = 2, 3 and n >= 4.
inline constexpr double hinv_max_n2 = 0.25;
inline constexpr double hinv_max_n3 = 1.0 / 3.0;
inline constexpr double hinv_max_large = 0.5;
// ||v_a||_F^2 = (n^2 - 2n + 2) / (2 n^2); at n = 5 this is 17 / 50.
inline constexpr double v_norm_sq_n5 = 17.0 / 50.0;
// nu of three centered points at the vertices of an equilateral triangle.
inline constexpr double nu_equilateral = 1.5;
}  // namespace frozen

}  // namespace oracle
