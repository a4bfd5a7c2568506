#pragma once

// The non-orthogonal basis {w_a} of the space S of symmetric matrices with zero
// row sums, its dual basis {v_a}, and the sampling operators built on them.
//
// For a = (i, j):
//   w_a = e_ii + e_jj - e_ij - e_ji,            <X, w_a> = D_ij
//   v_a = -1/2 (a b^T + b a^T),  a = e_i - 1/n 1,  b = e_j - 1/n 1
//
// Operators take the coefficients c_a = <Y, w_a> on the sampled set Omega and
// return images of the form sum_b e_b w_b, so they never need Y itself. The
// fast paths below run in O(m + n) for |Omega| = m; the dense constructions are
// reference implementations for small n.

#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "edmc/geometry.hpp"
#include "edmc/sampling.hpp"

namespace edmc {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Sparse symmetric n x n matrix; both triangles are stored.
class SparseSym {
 public:
  struct Entry {
    int i;
    int j;
    double value;
  };

  SparseSym() = default;
  SparseSym(int n, SparseMatrix full);

  // sum_{a in omega} coeffs[a] * w_a.
  static SparseSym from_w_expansion(int n, std::span<const IndexPair> omega, std::span<const double> coeffs);
  // Hollow symmetric matrix with values[k] at omega[k] and its mirror.
  static SparseSym from_upper(int n, std::span<const IndexPair> omega, std::span<const double> values);

  int n() const { return n_; }
  Index nnz() const { return matrix_.nonZeros(); }
  const SparseMatrix& matrix() const { return matrix_; }
  double coeff(int i, int j) const { return matrix_.coeff(i, j); }
  // Upper-triangle entries (i <= j) in column-major order.
  std::vector<Entry> entries() const;
  Matrix dense() const { return Matrix(matrix_); }
  Vector row_sums() const;

 private:
  int n_ = 0;
  SparseMatrix matrix_;
};

struct DualBasisConstants {
  int n = 0;
  double v_norm_sq = 0.0;    // ||v_a||_F^2
  double h_diag = 0.0;       // H^{aa}
  double h_adjacent = 0.0;   // H^{ab}, a and b share one index
  double h_disjoint = 0.0;   // H^{ab}, a and b disjoint
  double h_eig_max = 0.0;    // lambda_max(H)
  double hinv_eig_max = 0.0; // lambda_max(H^{-1})
  double w_spectral = 2.0;   // ||w_a||
  double v_spectral = 0.5;   // ||v_a||
};

DualBasisConstants dual_basis_constants(int n);

// Number of shared indices between two pairs (0, 1 or 2).
int shared_indices(const IndexPair& a, const IndexPair& b);

// <w_a, w_b> in {4, 1, 0}.
double h_entry(const IndexPair& a, const IndexPair& b);
// <v_a, v_b> from the closed form.
double h_inverse_entry(int n, const IndexPair& a, const IndexPair& b);

double w_inner(const Matrix& x, const IndexPair& a);
double w_inner(const DenseSym& x, const IndexPair& a);
// sum_k lambda_k (u_ik - u_jk)^2 in O(r).
double w_inner(const RankRGram& x, const IndexPair& a);
std::vector<double> w_coefficients(const RankRGram& x, std::span<const IndexPair> omega);
std::vector<double> w_coefficients(const Matrix& x, std::span<const IndexPair> omega);

DenseSym w_alpha_dense(int n, const IndexPair& a);
DenseSym v_alpha_dense(int n, const IndexPair& a);

// F_Omega: sum_a c_a w_a.
SparseSym f_omega_apply(int n, std::span<const IndexPair> omega, std::span<const double> coeffs);

// -1/2 J S J for a sparse symmetric S, kept as S plus its row sums so that
// products cost O(nnz + n) and the dense form is built only on request.
class CenteredSparse {
 public:
  explicit CenteredSparse(SparseSym s, double scale = -0.5);

  int n() const { return s_.n(); }
  Matrix apply(const Matrix& x) const;
  DenseSym dense() const;

 private:
  SparseSym s_;
  Vector row_sums_;
  double total_ = 0.0;
  double scale_;
};

// R_Omega(X) = -1/2 J P_Omega(D) J from the hollow matrix holding the observed
// squared distances.
DenseSym r_omega_apply(const SparseSym& sampled_distances);
CenteredSparse r_omega_operator(const SampledDistances& samples);

// Coefficients e_b (b in omega) of R*R(Y) = sum_b e_b w_b, computed from
// e_b = S/n^2 - (t_k + t_l)/(2n) + c_b/2 with t the per-node coefficient sums.
std::vector<double> rstar_r_coefficients(int n, std::span<const IndexPair> omega, std::span<const double> coeffs);
SparseSym rstar_r_apply(int n, std::span<const IndexPair> omega, std::span<const double> coeffs);

// M_Omega = R*R - ||v_a||^2 (1 - p) F_Omega.
std::vector<double> m_omega_coefficients(int n, std::span<const IndexPair> omega, std::span<const double> coeffs,
                                         double p);
SparseSym m_omega_apply(int n, std::span<const IndexPair> omega, std::span<const double> coeffs, double p);

// <Y, M_Omega Y> given c = <Y, w_a> on omega.
double m_omega_quadratic_form(int n, std::span<const IndexPair> omega, std::span<const double> coeffs, double p);

enum class SamplingOperator { f_omega, r_omega, rstar_r, m_omega };

enum class OperatorCoordinates {
  // n^2 x n^2 matrix acting on column-stacked n x n matrices.
  vectorized,
  // L x L matrix mapping c = (<Y, w_a>)_a to (<Op(Y), w_a>)_a for Y in S.
  w_coefficients,
};

// Dense materialization built from w_alpha_dense / v_alpha_dense and numerical
// inner products. Guarded to n <= 20.
Matrix dense_operator_matrix(SamplingOperator op, int n, std::span<const IndexPair> omega, double p,
                             OperatorCoordinates coords = OperatorCoordinates::vectorized);

// sum_a v_a^2 = (n^2 - 2n + 2) / (4n) J.
DenseSym sum_v_squared(int n);

}  // namespace edmc
