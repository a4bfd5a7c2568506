#include "edmc/dualbasis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edmc/error.hpp"

namespace edmc {

namespace {

void require_aligned(std::span<const IndexPair> omega, std::span<const double> coeffs) {
  if (omega.size() != coeffs.size()) {
    throw Error(ErrorKind::shape_mismatch, "coefficient count differs from index count");
  }
}

void require_index(int n, const IndexPair& a) {
  if (a.i < 0 || a.j >= n || a.i >= a.j) {
    throw Error(ErrorKind::index_out_of_range,
                "index pair (" + std::to_string(a.i) + "," + std::to_string(a.j) + ") invalid for n=" +
                    std::to_string(n));
  }
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

}  // namespace

SparseSym::SparseSym(int n, SparseMatrix full) : n_(n), matrix_(std::move(full)) {
  if (matrix_.rows() != n || matrix_.cols() != n) {
    throw Error(ErrorKind::shape_mismatch, "SparseSym: matrix is not n x n");
  }
  matrix_.makeCompressed();
}

SparseSym SparseSym::from_w_expansion(int n, std::span<const IndexPair> omega, std::span<const double> coeffs) {
  require_aligned(omega, coeffs);
  Vector diagonal = Vector::Zero(n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * omega.size() + static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const IndexPair& a = omega[k];
    require_index(n, a);
    diagonal(a.i) += coeffs[k];
    diagonal(a.j) += coeffs[k];
    triplets.emplace_back(a.i, a.j, -coeffs[k]);
    triplets.emplace_back(a.j, a.i, -coeffs[k]);
  }
  for (int i = 0; i < n; ++i)
    if (diagonal(i) != 0.0) triplets.emplace_back(i, i, diagonal(i));
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return SparseSym(n, std::move(m));
}

SparseSym SparseSym::from_upper(int n, std::span<const IndexPair> omega, std::span<const double> values) {
  require_aligned(omega, values);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    require_index(n, omega[k]);
    triplets.emplace_back(omega[k].i, omega[k].j, values[k]);
    triplets.emplace_back(omega[k].j, omega[k].i, values[k]);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return SparseSym(n, std::move(m));
}

std::vector<SparseSym::Entry> SparseSym::entries() const {
  std::vector<Entry> out;
  for (int col = 0; col < matrix_.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(matrix_, col); it; ++it)
      if (it.row() <= it.col()) out.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
  return out;
}

Vector SparseSym::row_sums() const { return matrix_ * Vector::Ones(n_); }

DualBasisConstants dual_basis_constants(int n) {
  if (n < 2) throw Error(ErrorKind::invalid_input, "dual basis needs n >= 2");
  const double nd = n;
  DualBasisConstants c;
  c.n = n;
  c.h_diag = 0.5 * (1.0 - 2.0 / nd + 2.0 / (nd * nd));
  c.v_norm_sq = c.h_diag;
  c.h_adjacent = -1.0 / (2.0 * nd) + 1.0 / (nd * nd);
  c.h_disjoint = 1.0 / (nd * nd);
  c.h_eig_max = 2.0 * nd;
  // H has eigenvalues 2n (once), n (n - 1 times) and 2 (L - n times); the
  // smallest one is 2 only once L > n, i.e. n >= 4.
  const double h_eig_min = n >= 4 ? 2.0 : (n == 3 ? 3.0 : 4.0);
  c.hinv_eig_max = 1.0 / h_eig_min;
  return c;
}

int shared_indices(const IndexPair& a, const IndexPair& b) {
  return (a.i == b.i) + (a.i == b.j) + (a.j == b.i) + (a.j == b.j);
}

double h_entry(const IndexPair& a, const IndexPair& b) {
  const int s = shared_indices(a, b);
  return s == 2 ? 4.0 : (s == 1 ? 1.0 : 0.0);
}

double h_inverse_entry(int n, const IndexPair& a, const IndexPair& b) {
  const double nd = n;
  const int s = shared_indices(a, b);
  return 1.0 / (nd * nd) - s / (2.0 * nd) + (s == 2 ? 0.5 : 0.0);
}

double w_inner(const Matrix& x, const IndexPair& a) {
  if (a.i < 0 || a.j >= x.rows() || a.i == a.j || a.i >= x.rows() || a.j < 0) {
    throw Error(ErrorKind::index_out_of_range, "w_inner: index out of range");
  }
  return x(a.i, a.i) + x(a.j, a.j) - x(a.i, a.j) - x(a.j, a.i);
}

double w_inner(const DenseSym& x, const IndexPair& a) { return w_inner(x.matrix(), a); }

double w_inner(const RankRGram& x, const IndexPair& a) {
  require_index(static_cast<int>(x.n()), a);
  const Matrix& u = x.basis();
  const Vector& lambda = x.eigenvalues();
  double sum = 0.0;
  for (Index k = 0; k < x.rank(); ++k) {
    const double d = u(a.i, k) - u(a.j, k);
    sum += lambda(k) * d * d;
  }
  return sum;
}

std::vector<double> w_coefficients(const RankRGram& x, std::span<const IndexPair> omega) {
  std::vector<double> out(omega.size());
  // Row-major copy keeps each u_i contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> u = x.basis();
  const Vector& lambda = x.eigenvalues();
  const int n = static_cast<int>(x.n());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    require_index(n, omega[k]);
    double sum = 0.0;
    for (Index c = 0; c < x.rank(); ++c) {
      const double d = u(omega[k].i, c) - u(omega[k].j, c);
      sum += lambda(c) * d * d;
    }
    out[k] = sum;
  }
  return out;
}

std::vector<double> w_coefficients(const Matrix& x, std::span<const IndexPair> omega) {
  std::vector<double> out(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) out[k] = w_inner(x, omega[k]);
  return out;
}

DenseSym w_alpha_dense(int n, const IndexPair& a) {
  require_index(n, a);
  Matrix w = Matrix::Zero(n, n);
  w(a.i, a.i) = 1.0;
  w(a.j, a.j) = 1.0;
  w(a.i, a.j) = -1.0;
  w(a.j, a.i) = -1.0;
  return DenseSym(w);
}

DenseSym v_alpha_dense(int n, const IndexPair& a) {
  require_index(n, a);
  Vector av = Vector::Constant(n, -1.0 / n);
  Vector bv = av;
  av(a.i) += 1.0;
  bv(a.j) += 1.0;
  const Matrix v = -0.5 * (av * bv.transpose() + bv * av.transpose());
  return DenseSym(v);
}

SparseSym f_omega_apply(int n, std::span<const IndexPair> omega, std::span<const double> coeffs) {
  return SparseSym::from_w_expansion(n, omega, coeffs);
}

CenteredSparse::CenteredSparse(SparseSym s, double scale) : s_(std::move(s)), scale_(scale) {
  row_sums_ = s_.row_sums();
  total_ = row_sums_.sum();
}

Matrix CenteredSparse::apply(const Matrix& x) const {
  Matrix y = x;
  if (y.rows() > 0) y.rowwise() -= y.colwise().mean();
  Matrix z = s_.matrix() * y;
  if (z.rows() > 0) z.rowwise() -= z.colwise().mean();
  return scale_ * z;
}

DenseSym CenteredSparse::dense() const {
  const int n = s_.n();
  Matrix out = s_.dense();
  if (n > 0) {
    const double inv_n = 1.0 / n;
    out.colwise() -= inv_n * row_sums_;
    out.rowwise() -= inv_n * row_sums_.transpose();
    out.array() += total_ * inv_n * inv_n;
  }
  out *= scale_;
  return DenseSym(out);
}

DenseSym r_omega_apply(const SparseSym& sampled_distances) { return CenteredSparse(sampled_distances).dense(); }

CenteredSparse r_omega_operator(const SampledDistances& samples) {
  return CenteredSparse(SparseSym::from_upper(samples.n, samples.omega, samples.values));
}

std::vector<double> rstar_r_coefficients(int n, std::span<const IndexPair> omega, std::span<const double> coeffs) {
  require_aligned(omega, coeffs);
  if (n < 2) throw Error(ErrorKind::invalid_input, "rstar_r: n must be at least 2");
  // <v_a, v_b> = 1/n^2 - s(a,b)/(2n) + [a == b]/2, where s counts shared indices.
  std::vector<double> node_sum(static_cast<std::size_t>(n), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < omega.size(); ++k) {
    require_index(n, omega[k]);
    node_sum[static_cast<std::size_t>(omega[k].i)] += coeffs[k];
    node_sum[static_cast<std::size_t>(omega[k].j)] += coeffs[k];
    total += coeffs[k];
  }
  const double nd = n;
  const double global = total / (nd * nd);
  const double local = 1.0 / (2.0 * nd);
  std::vector<double> out(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const auto i = static_cast<std::size_t>(omega[k].i);
    const auto j = static_cast<std::size_t>(omega[k].j);
    out[k] = global - local * (node_sum[i] + node_sum[j]) + 0.5 * coeffs[k];
  }
  return out;
}

SparseSym rstar_r_apply(int n, std::span<const IndexPair> omega, std::span<const double> coeffs) {
  const auto e = rstar_r_coefficients(n, omega, coeffs);
  return SparseSym::from_w_expansion(n, omega, e);
}

std::vector<double> m_omega_coefficients(int n, std::span<const IndexPair> omega, std::span<const double> coeffs,
                                         double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "m_omega: p must lie in (0, 1]");
  auto e = rstar_r_coefficients(n, omega, coeffs);
  const double shrink = dual_basis_constants(n).v_norm_sq * (1.0 - p);
  for (std::size_t k = 0; k < e.size(); ++k) e[k] -= shrink * coeffs[k];
  return e;
}

SparseSym m_omega_apply(int n, std::span<const IndexPair> omega, std::span<const double> coeffs, double p) {
  const auto e = m_omega_coefficients(n, omega, coeffs, p);
  return SparseSym::from_w_expansion(n, omega, e);
}

double m_omega_quadratic_form(int n, std::span<const IndexPair> omega, std::span<const double> coeffs, double p) {
  const auto e = m_omega_coefficients(n, omega, coeffs, p);
  double sum = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) sum += e[k] * coeffs[k];
  return sum;
}

Matrix dense_operator_matrix(SamplingOperator op, int n, std::span<const IndexPair> omega, double p,
                             OperatorCoordinates coords) {
  if (n > 20) throw Error(ErrorKind::too_large, "dense_operator_matrix: n must be at most 20");
  if (n < 2) throw Error(ErrorKind::invalid_input, "dense_operator_matrix: n must be at least 2");
  if (op == SamplingOperator::m_omega && !(p > 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::invalid_input, "dense_operator_matrix: p must lie in (0, 1]");
  }
  const auto m = static_cast<Index>(omega.size());
  const Index nn = static_cast<Index>(n) * n;
  Matrix w_cols(nn, m);
  Matrix v_cols(nn, m);
  for (Index k = 0; k < m; ++k) {
    w_cols.col(k) = vec(w_alpha_dense(n, omega[static_cast<std::size_t>(k)]).matrix());
    v_cols.col(k) = vec(v_alpha_dense(n, omega[static_cast<std::size_t>(k)]).matrix());
  }

  Matrix vectorized;
  switch (op) {
    case SamplingOperator::f_omega:
      vectorized = w_cols * w_cols.transpose();
      break;
    case SamplingOperator::r_omega:
      vectorized = v_cols * w_cols.transpose();
      break;
    case SamplingOperator::rstar_r:
    case SamplingOperator::m_omega: {
      Matrix gram = v_cols.transpose() * v_cols;
      if (op == SamplingOperator::m_omega) gram.diagonal() *= p;
      vectorized = w_cols * gram * w_cols.transpose();
      break;
    }
  }
  if (coords == OperatorCoordinates::vectorized) return vectorized;

  const auto all = all_pairs(n);
  const auto total = static_cast<Index>(all.size());
  Matrix w_all(nn, total);
  Matrix v_all(nn, total);
  for (Index k = 0; k < total; ++k) {
    w_all.col(k) = vec(w_alpha_dense(n, all[static_cast<std::size_t>(k)]).matrix());
    v_all.col(k) = vec(v_alpha_dense(n, all[static_cast<std::size_t>(k)]).matrix());
  }
  return w_all.transpose() * vectorized * v_all;
}

DenseSym sum_v_squared(int n) {
  if (n < 2) throw Error(ErrorKind::invalid_input, "sum_v_squared: n must be at least 2");
  const double nd = n;
  const double scale = (nd * nd - 2.0 * nd + 2.0) / (4.0 * nd);
  Matrix j = Matrix::Identity(n, n);
  j.array() -= 1.0 / nd;
  return DenseSym(scale * j);
}

}  // namespace edmc
