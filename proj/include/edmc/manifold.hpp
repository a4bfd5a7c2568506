#pragma once

// Tangent space and hard-thresholding retraction on the manifold of rank-r
// symmetric n x n matrices.

#include <span>
#include <vector>

#include "edmc/dualbasis.hpp"
#include "edmc/geometry.hpp"
#include "edmc/sampling.hpp"

namespace edmc {

// P_T(Y) = U M U^T + Zu U^T + U Zu^T with U^T Zu = 0.
class TangentVector {
 public:
  TangentVector() = default;
  TangentVector(RankRGram base, Matrix m, Matrix zu);

  static TangentVector zero(const RankRGram& base);

  const RankRGram& base() const { return base_; }
  const Matrix& m() const { return m_; }
  const Matrix& zu() const { return zu_; }

  Matrix dense() const;
  double norm_sq() const;
  double norm() const;
  double inner(const TangentVector& other) const;
  TangentVector scaled(double s) const;
  TangentVector plus(const TangentVector& other, double s = 1.0) const;

  // <Y, w_a> for a in omega, O(r) per index.
  std::vector<double> coefficients(std::span<const IndexPair> omega) const;

 private:
  RankRGram base_;
  Matrix m_;
  Matrix zu_;
};

TangentVector project_tangent(const RankRGram& base, const SparseSym& y);
TangentVector project_tangent(const RankRGram& base, const Matrix& y);

struct ThresholdResult {
  RankRGram gram;
  bool boundary_tie = false;  // |lambda_r| == |lambda_{r+1}| up to roundoff
  Index numerical_rank = 0;   // eigenvalues above n * eps * |lambda_1|
};

// Best rank-r approximation by eigenvalue magnitude. Eigenpairs below the
// numerical-rank tolerance are dropped, so the result can have rank < r.
ThresholdResult hard_threshold(const Matrix& y, Index r);

struct RetractionResult {
  RankRGram next;
  double change_norm = 0.0;  // ||next - base||_F
  bool boundary_tie = false;
};

// H_r(X + step * t) through a QR of [U | Zu] and a 2r x 2r eigenproblem.
// Throws degenerate_iterate when fewer than r core eigenvalues are nonzero.
RetractionResult retract_structured(const RankRGram& base, const TangentVector& t, double step);

}  // namespace edmc
