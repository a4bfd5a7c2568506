#pragma once

// Point clouds, centered Gram matrices and squared distance matrices.
//
// A configuration of n points in R^r is stored with points as rows. When the
// points are centered, the Gram matrix X = P P^T and the squared distance
// matrix D determine each other:
//
//   D = diag(X) 1^T + 1 diag(X)^T - 2 X,      X = -1/2 J D J,
//
// with J = I - (1/n) 1 1^T. Classical MDS recovers P = U Lambda^{1/2} from the
// truncated eigendecomposition of X.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace edmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(Matrix coords, bool centered = false);

  Index n() const { return coords_.rows(); }
  Index r() const { return coords_.cols(); }
  const Matrix& coords() const { return coords_; }
  bool centered() const { return centered_; }

  // Column sums vanish within 1e-10 * n * max|coord|.
  bool is_centered() const;

 private:
  Matrix coords_;
  bool centered_ = false;
};

// Symmetric n x n matrix. The upper triangle is authoritative; the lower
// triangle is mirrored on construction so A(i,j) == A(j,i) bit for bit.
class DenseSym {
 public:
  DenseSym() = default;
  explicit DenseSym(const Matrix& upper);

  static DenseSym zero(Index n);

  Index n() const { return data_.rows(); }
  const Matrix& matrix() const { return data_; }
  double operator()(Index i, Index j) const { return data_(i, j); }

 private:
  Matrix data_;
};

// Rank-r symmetric matrix U diag(lambda) U^T with orthonormal columns in U.
// Eigenvalues are kept in descending magnitude order.
class RankRGram {
 public:
  RankRGram() = default;
  RankRGram(Matrix basis, Vector eigenvalues);

  Index n() const { return basis_.rows(); }
  Index rank() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }
  const Vector& eigenvalues() const { return eigenvalues_; }

  Matrix dense() const;
  double frobenius_norm() const { return eigenvalues_.norm(); }
  // lambda_1 / lambda_r by magnitude.
  double condition_number() const;

  // ||U^T U - I||_max and ||U^T 1||_max, for invariant checks.
  double orthonormality_defect() const;
  double centering_defect() const;

 private:
  Matrix basis_;
  Vector eigenvalues_;
};

// Eigen-pair ordering: descending |lambda|, then descending signed value, then
// lowest original index.
std::vector<Index> magnitude_order(const Vector& eigenvalues);

struct SymmetricEigen {
  Vector values;   // sorted by magnitude_order
  Matrix vectors;  // columns aligned with values
};

SymmetricEigen sorted_eigen(const Matrix& symmetric);

DenseSym gram_from_points(const PointCloud& points);
// P P^T in factored form through the r x r matrix P^T P. Directions with
// eigenvalue at or below n * eps * lambda_1 are dropped.
RankRGram factored_gram_from_points(const PointCloud& points);
DenseSym distances_from_gram(const DenseSym& gram);
DenseSym gram_from_distances(const DenseSym& distances);
PointCloud center_points(const PointCloud& points);

// Throws not_embeddable when one of the r leading eigenvalues of -1/2 J D J is
// negative beyond 1e-8 * |lambda_1|; smaller negative values are clamped to 0.
PointCloud classical_mds(const DenseSym& distances, Index r);

// min over orthogonal Q of ||A_c - B_c Q||_F after centering both clouds.
double procrustes_error(const PointCloud& a, const PointCloud& b);

// ||A - B||_F / ||B||_F evaluated on the factors without forming n x n
// matrices.
double relative_distance(const RankRGram& a, const RankRGram& b);
double frobenius_distance(const RankRGram& a, const RankRGram& b);

// CSV: one point per row, optional non-numeric header row.
PointCloud read_points_csv(std::istream& in);
PointCloud read_points_csv(const std::filesystem::path& path);
void write_points_csv(std::ostream& out, const PointCloud& points);
void write_points_csv(const std::filesystem::path& path, const PointCloud& points);

}  // namespace edmc
