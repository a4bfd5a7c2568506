#include "edmc/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "edmc/error.hpp"

namespace edmc {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

bool is_boundary_tie(const Vector& sorted_values, Index r) {
  if (r <= 0 || r >= sorted_values.size()) return false;
  const double lead = std::abs(sorted_values(0));
  const double gap = std::abs(sorted_values(r - 1)) - std::abs(sorted_values(r));
  return lead > 0.0 && gap <= 64.0 * kEps * lead;
}

}  // namespace

TangentVector::TangentVector(RankRGram base, Matrix m, Matrix zu)
    : base_(std::move(base)), m_(std::move(m)), zu_(std::move(zu)) {
  const Index r = base_.rank();
  if (m_.rows() != r || m_.cols() != r || zu_.rows() != base_.n() || zu_.cols() != r) {
    throw Error(ErrorKind::shape_mismatch, "TangentVector: component shapes do not match the base");
  }
}

TangentVector TangentVector::zero(const RankRGram& base) {
  return TangentVector(base, Matrix::Zero(base.rank(), base.rank()), Matrix::Zero(base.n(), base.rank()));
}

Matrix TangentVector::dense() const {
  const Matrix& u = base_.basis();
  Matrix out = u * m_ * u.transpose();
  Matrix cross = zu_ * u.transpose();
  out += cross + cross.transpose();
  return out;
}

double TangentVector::norm_sq() const { return m_.squaredNorm() + 2.0 * zu_.squaredNorm(); }

double TangentVector::norm() const { return std::sqrt(norm_sq()); }

double TangentVector::inner(const TangentVector& other) const {
  return m_.cwiseProduct(other.m_).sum() + 2.0 * zu_.cwiseProduct(other.zu_).sum();
}

TangentVector TangentVector::scaled(double s) const { return TangentVector(base_, s * m_, s * zu_); }

TangentVector TangentVector::plus(const TangentVector& other, double s) const {
  return TangentVector(base_, m_ + s * other.m_, zu_ + s * other.zu_);
}

std::vector<double> TangentVector::coefficients(std::span<const IndexPair> omega) const {
  // d^T Y d for d = e_i - e_j equals du^T (M du + 2 dz) with du = u_i - u_j.
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor u = base_.basis();
  const RowMajor c = base_.basis() * m_ + 2.0 * zu_;
  const Index n = base_.n();
  const Index r = base_.rank();
  std::vector<double> out(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const IndexPair& a = omega[k];
    if (a.i < 0 || a.j >= n || a.i >= a.j) {
      throw Error(ErrorKind::index_out_of_range, "TangentVector::coefficients: invalid index pair");
    }
    double sum = 0.0;
    for (Index q = 0; q < r; ++q) sum += (u(a.i, q) - u(a.j, q)) * (c(a.i, q) - c(a.j, q));
    out[k] = sum;
  }
  return out;
}

TangentVector project_tangent(const RankRGram& base, const SparseSym& y) {
  if (y.n() != base.n()) throw Error(ErrorKind::shape_mismatch, "project_tangent: dimension mismatch");
  const Matrix& u = base.basis();
  const Matrix yu = y.matrix() * u;
  Matrix m = u.transpose() * yu;
  m = 0.5 * (m + m.transpose()).eval();
  Matrix zu = yu - u * m;
  return TangentVector(base, std::move(m), std::move(zu));
}

TangentVector project_tangent(const RankRGram& base, const Matrix& y) {
  if (y.rows() != base.n() || y.cols() != base.n()) {
    throw Error(ErrorKind::shape_mismatch, "project_tangent: dimension mismatch");
  }
  const Matrix& u = base.basis();
  const Matrix sym = 0.5 * (y + y.transpose());
  const Matrix yu = sym * u;
  Matrix m = u.transpose() * yu;
  m = 0.5 * (m + m.transpose()).eval();
  Matrix zu = yu - u * m;
  return TangentVector(base, std::move(m), std::move(zu));
}

ThresholdResult hard_threshold(const Matrix& y, Index r) {
  if (y.rows() != y.cols()) throw Error(ErrorKind::shape_mismatch, "hard_threshold: input is not square");
  if (r < 0) throw Error(ErrorKind::invalid_input, "hard_threshold: negative rank");
  const Index n = y.rows();
  const SymmetricEigen eig = sorted_eigen(0.5 * (y + y.transpose()));
  ThresholdResult out;
  const double lead = n > 0 ? std::abs(eig.values(0)) : 0.0;
  const double tol = static_cast<double>(std::max<Index>(n, 1)) * kEps * lead;
  for (Index k = 0; k < n; ++k)
    if (std::abs(eig.values(k)) > tol) ++out.numerical_rank;
  const Index keep = std::min(r, out.numerical_rank);
  out.boundary_tie = is_boundary_tie(eig.values, r);
  out.gram = RankRGram(eig.vectors.leftCols(keep), eig.values.head(keep));
  return out;
}

RetractionResult retract_structured(const RankRGram& base, const TangentVector& t, double step) {
  const Index n = base.n();
  const Index r = base.rank();
  if (t.base().n() != n || t.base().rank() != r) {
    throw Error(ErrorKind::shape_mismatch, "retract_structured: tangent vector is based elsewhere");
  }
  const Matrix& u = base.basis();
  const Index k = std::min(n, 2 * r) - r;

  // Orthonormal complement of U inside span[U, Zu]; Householder keeps Q
  // orthonormal even when Zu is rank deficient.
  Matrix stacked(n, 2 * r);
  stacked << u, t.zu();
  Eigen::HouseholderQR<Matrix> qr(stacked);
  const Matrix qfull = qr.householderQ() * Matrix::Identity(n, r + k);
  Matrix q = qfull.rightCols(k);
  q -= u * (u.transpose() * q);
  Eigen::HouseholderQR<Matrix> qr2(q);
  q = qr2.householderQ() * Matrix::Identity(n, k);

  // Zu = U a + Q R up to roundoff.
  const Matrix a = u.transpose() * t.zu();
  const Matrix rr = q.transpose() * t.zu();

  Matrix core = Matrix::Zero(r + k, r + k);
  core.topLeftCorner(r, r) = base.eigenvalues().asDiagonal();
  core.topLeftCorner(r, r) += step * (t.m() + a + a.transpose());
  core.bottomLeftCorner(k, r) = step * rr;
  core.topRightCorner(r, k) = step * rr.transpose();
  core = 0.5 * (core + core.transpose()).eval();

  const SymmetricEigen eig = sorted_eigen(core);
  const double lead = std::abs(eig.values(0));
  const double tol = static_cast<double>(std::max<Index>(n, 1)) * kEps * lead;
  if (r > 0 && !(std::abs(eig.values(r - 1)) > tol)) {
    throw Error(ErrorKind::degenerate_iterate, "retraction: rank collapsed below target rank");
  }

  RetractionResult out;
  out.boundary_tie = is_boundary_tie(eig.values, r);
  const Matrix v = eig.vectors.leftCols(r);
  const Vector lambda = eig.values.head(r);

  Matrix basis(n, r + k);
  basis << u, q;
  out.next = RankRGram(basis * v, lambda);

  Matrix before = Matrix::Zero(r + k, r + k);
  before.topLeftCorner(r, r) = base.eigenvalues().asDiagonal();
  out.change_norm = (v * lambda.asDiagonal() * v.transpose() - before).norm();
  return out;
}

}  // namespace edmc
