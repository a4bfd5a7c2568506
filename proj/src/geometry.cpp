#include "edmc/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>

#include "edmc/error.hpp"

namespace edmc {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorKind::invalid_input, std::string(what) + " has non-finite entries");
  }
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::shape_mismatch, std::string(what) + " is not square");
  }
}

Matrix centering_applied(const Matrix& a) {
  // J A J without forming J.
  const Index n = a.rows();
  if (n == 0) return a;
  const Vector row_means = a.rowwise().mean();
  const Vector col_means = a.colwise().mean().transpose();
  const double grand = a.mean();
  Matrix out = a;
  out.colwise() -= row_means;
  out.rowwise() -= col_means.transpose();
  out.array() += grand;
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_row(std::string_view line, std::vector<double>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view field =
        trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) return false;
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return true;
}

}  // namespace

PointCloud::PointCloud(Matrix coords, bool centered) : coords_(std::move(coords)), centered_(centered) {
  require_finite(coords_, "point cloud");
  if (centered_ && !is_centered()) {
    throw Error(ErrorKind::invalid_input, "point cloud flagged centered has nonzero column sums");
  }
}

bool PointCloud::is_centered() const {
  if (n() == 0) return true;
  const double scale = coords_.size() == 0 ? 0.0 : coords_.cwiseAbs().maxCoeff();
  const double tol = 1e-10 * static_cast<double>(n()) * std::max(scale, 1e-300);
  return (coords_.colwise().sum().cwiseAbs().array() <= tol).all();
}

DenseSym::DenseSym(const Matrix& upper) {
  require_square(upper, "symmetric matrix");
  data_ = upper.triangularView<Eigen::Upper>();
  data_.triangularView<Eigen::StrictlyLower>() = data_.transpose();
}

DenseSym DenseSym::zero(Index n) { return DenseSym(Matrix::Zero(n, n)); }

RankRGram::RankRGram(Matrix basis, Vector eigenvalues)
    : basis_(std::move(basis)), eigenvalues_(std::move(eigenvalues)) {
  if (basis_.cols() != eigenvalues_.size()) {
    throw Error(ErrorKind::shape_mismatch, "RankRGram: basis columns and eigenvalue count differ");
  }
  require_finite(basis_, "RankRGram basis");
  require_finite(eigenvalues_, "RankRGram eigenvalues");
}

Matrix RankRGram::dense() const {
  return basis_ * eigenvalues_.asDiagonal() * basis_.transpose();
}

double RankRGram::condition_number() const {
  if (rank() == 0) return 1.0;
  return std::abs(eigenvalues_(0)) / std::abs(eigenvalues_(rank() - 1));
}

double RankRGram::orthonormality_defect() const {
  if (rank() == 0) return 0.0;
  return (basis_.transpose() * basis_ - Matrix::Identity(rank(), rank())).cwiseAbs().maxCoeff();
}

double RankRGram::centering_defect() const {
  if (rank() == 0) return 0.0;
  return basis_.colwise().sum().cwiseAbs().maxCoeff();
}

std::vector<Index> magnitude_order(const Vector& eigenvalues) {
  std::vector<Index> order(static_cast<std::size_t>(eigenvalues.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double ma = std::abs(eigenvalues(a));
    const double mb = std::abs(eigenvalues(b));
    if (ma != mb) return ma > mb;
    if (eigenvalues(a) != eigenvalues(b)) return eigenvalues(a) > eigenvalues(b);
    return a < b;
  });
  return order;
}

SymmetricEigen sorted_eigen(const Matrix& symmetric) {
  require_square(symmetric, "eigendecomposition input");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::invalid_input, "symmetric eigendecomposition failed");
  }
  const auto order = magnitude_order(solver.eigenvalues());
  SymmetricEigen out;
  out.values.resize(symmetric.rows());
  out.vectors.resize(symmetric.rows(), symmetric.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.values(static_cast<Index>(k)) = solver.eigenvalues()(order[k]);
    out.vectors.col(static_cast<Index>(k)) = solver.eigenvectors().col(order[k]);
  }
  return out;
}

DenseSym gram_from_points(const PointCloud& points) {
  if (!points.is_centered()) {
    throw Error(ErrorKind::invalid_input, "gram_from_points: points must be centered");
  }
  const Matrix& p = points.coords();
  Matrix x = Matrix::Zero(p.rows(), p.rows());
  x.selfadjointView<Eigen::Upper>().rankUpdate(p);
  return DenseSym(x);
}

RankRGram factored_gram_from_points(const PointCloud& points) {
  if (!points.is_centered()) {
    throw Error(ErrorKind::invalid_input, "factored_gram_from_points: points must be centered");
  }
  const Matrix& p = points.coords();
  const SymmetricEigen eig = sorted_eigen(p.transpose() * p);
  const double lead = eig.values.size() > 0 ? std::abs(eig.values(0)) : 0.0;
  const double tol = static_cast<double>(std::max<Index>(points.n(), 1)) * 2.220446049250313e-16 * lead;
  Index keep = 0;
  while (keep < eig.values.size() && eig.values(keep) > tol) ++keep;
  Matrix u = p * eig.vectors.leftCols(keep);
  for (Index k = 0; k < keep; ++k) u.col(k) /= std::sqrt(eig.values(k));
  // One Gram-Schmidt pass to restore orthonormality lost to roundoff.
  Eigen::HouseholderQR<Matrix> qr(u);
  Matrix q = qr.householderQ() * Matrix::Identity(u.rows(), keep);
  for (Index k = 0; k < keep; ++k)
    if (q.col(k).dot(u.col(k)) < 0.0) q.col(k) = -q.col(k);
  return RankRGram(std::move(q), eig.values.head(keep));
}

DenseSym distances_from_gram(const DenseSym& gram) {
  const Matrix& x = gram.matrix();
  require_finite(x, "Gram matrix");
  const Index n = x.rows();
  Matrix d(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) d(i, j) = x(i, i) + x(j, j) - 2.0 * x(i, j);
    d(j, j) = 0.0;
  }
  return DenseSym(d);
}

DenseSym gram_from_distances(const DenseSym& distances) {
  require_finite(distances.matrix(), "distance matrix");
  Matrix x = -0.5 * centering_applied(distances.matrix());
  return DenseSym(x);
}

PointCloud center_points(const PointCloud& points) {
  Matrix c = points.coords();
  if (c.rows() > 0) c.rowwise() -= c.colwise().mean();
  return PointCloud(std::move(c), true);
}

PointCloud classical_mds(const DenseSym& distances, Index r) {
  if (r < 0 || r > distances.n()) {
    throw Error(ErrorKind::invalid_input, "classical_mds: target dimension out of range");
  }
  const DenseSym gram = gram_from_distances(distances);
  const SymmetricEigen eig = sorted_eigen(gram.matrix());
  const double lead = eig.values.size() > 0 ? std::abs(eig.values(0)) : 0.0;
  Matrix coords(distances.n(), r);
  for (Index k = 0; k < r; ++k) {
    double lambda = eig.values(k);
    if (lambda < -1e-8 * lead) {
      std::ostringstream msg;
      msg << "classical_mds: eigenvalue " << k << " is " << lambda << " (not embeddable)";
      throw Error(ErrorKind::not_embeddable, msg.str());
    }
    lambda = std::max(lambda, 0.0);
    coords.col(k) = eig.vectors.col(k) * std::sqrt(lambda);
  }
  if (coords.rows() > 0) coords.rowwise() -= coords.colwise().mean();
  return PointCloud(std::move(coords), true);
}

double procrustes_error(const PointCloud& a, const PointCloud& b) {
  if (a.n() != b.n() || a.r() != b.r()) {
    throw Error(ErrorKind::shape_mismatch, "procrustes_error: point clouds differ in shape");
  }
  const Matrix ac = center_points(a).coords();
  const Matrix bc = center_points(b).coords();
  Eigen::JacobiSVD<Matrix> svd(bc.transpose() * ac, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix q = svd.matrixU() * svd.matrixV().transpose();
  return (ac - bc * q).norm();
}

double frobenius_distance(const RankRGram& a, const RankRGram& b) {
  if (a.n() != b.n()) throw Error(ErrorKind::shape_mismatch, "frobenius_distance: dimension mismatch");
  const Index ka = a.rank();
  const Index k = ka + b.rank();
  if (k == 0) return 0.0;
  Matrix stacked(a.n(), k);
  stacked << a.basis(), b.basis();
  Vector weights(k);
  weights << a.eigenvalues(), -b.eigenvalues();
  Eigen::HouseholderQR<Matrix> qr(stacked);
  const Index rows = std::min(a.n(), k);
  const Matrix r = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
  return (r * weights.asDiagonal() * r.transpose()).norm();
}

double relative_distance(const RankRGram& a, const RankRGram& b) {
  return frobenius_distance(a, b) / b.frobenius_norm();
}

PointCloud read_points_csv(std::istream& in) {
  std::vector<double> values;
  std::vector<double> row;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (!parse_row(view, row)) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw Error(ErrorKind::invalid_input, "point CSV: unparsable row " + std::to_string(rows + 1));
    }
    first = false;
    if (cols < 0) cols = static_cast<Index>(row.size());
    if (static_cast<Index>(row.size()) != cols) {
      throw Error(ErrorKind::invalid_input, "point CSV: ragged row " + std::to_string(rows + 1));
    }
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::invalid_input, "point CSV: no points");
  Matrix coords(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) coords(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  PointCloud cloud(std::move(coords));
  return PointCloud(cloud.coords(), cloud.is_centered());
}

PointCloud read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  return read_points_csv(in);
}

void write_points_csv(std::ostream& out, const PointCloud& points) {
  for (Index j = 0; j < points.r(); ++j) out << (j ? "," : "") << 'x' << j;
  out << '\n' << std::setprecision(17);
  for (Index i = 0; i < points.n(); ++i) {
    for (Index j = 0; j < points.r(); ++j) out << (j ? "," : "") << points.coords()(i, j);
    out << '\n';
  }
}

void write_points_csv(const std::filesystem::path& path, const PointCloud& points) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  write_points_csv(out, points);
}

}  // namespace edmc
