#include "edmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "edmc/dualbasis.hpp"
#include "edmc/error.hpp"
#include "edmc/manifold.hpp"

namespace edmc {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

int pair_dot(const IndexPair& a, const IndexPair& b) {
  // (e_ai - e_aj) . (e_bi - e_bj)
  return (a.i == b.i) - (a.i == b.j) - (a.j == b.i) + (a.j == b.j);
}

void require_index(Index n, const IndexPair& a) {
  if (a.i < 0 || a.j >= n || a.i >= a.j) throw Error(ErrorKind::index_out_of_range, "invalid index pair");
}

// y = K K^T x with K's columns (U^T d_a) (x) d_a over all a in I, laid out
// so that entry (k, i) of the rn vector sits at k * n + i.
Vector apply_kkt(const RowMajor& u, const Vector& x) {
  const Index n = u.rows();
  const Index r = u.cols();
  Vector y = Vector::Zero(n * r);
  Vector g(r);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      double dot = 0.0;
      for (Index k = 0; k < r; ++k) {
        g(k) = u(i, k) - u(j, k);
        dot += g(k) * (x(k * n + i) - x(k * n + j));
      }
      for (Index k = 0; k < r; ++k) {
        const double v = g(k) * dot;
        y(k * n + i) += v;
        y(k * n + j) -= v;
      }
    }
  }
  return y;
}

}  // namespace

CoherenceReport incoherence_nu(const RankRGram& x, bool with_cross_terms) {
  const Index n = x.n();
  const Index r = x.rank();
  if (r == 0) throw Error(ErrorKind::invalid_input, "incoherence: rank must be positive");
  if (n < 2) throw Error(ErrorKind::invalid_input, "incoherence: need at least two points");

  CoherenceReport rep;
  rep.n = static_cast<int>(n);
  rep.r = static_cast<int>(r);
  const double nd = static_cast<double>(n);
  rep.lower_bound_stated = 1.0 + 2.0 / (nd - 1.0);
  rep.lower_bound_derived = nd / (nd - 1.0);
  rep.upper_bound = 2.0 * nd / static_cast<double>(r);

  const RowMajor u = x.basis();
  const Matrix gram = x.basis() * x.basis().transpose();
  for (Index j = 1; j < n; ++j) {
    for (Index i = 0; i < j; ++i) {
      const double d = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
      if (d > rep.max_pair_sq) {
        rep.max_pair_sq = d;
        rep.argmax_pair = {static_cast<int>(i), static_cast<int>(j)};
      }
    }
  }
  rep.nu = nd / (2.0 * static_cast<double>(r)) * rep.max_pair_sq;

  // Whitened point form (p_i - p_j)^T Lambda^{-1} (p_i - p_j) with P = U |Lambda|^{1/2}.
  const Vector mag = x.eigenvalues().cwiseAbs();
  const RowMajor points = x.basis() * mag.cwiseSqrt().asDiagonal();
  double whitened = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (Index k = 0; k < r; ++k) {
        const double d = points(i, k) - points(j, k);
        s += d * d / mag(k);
      }
      whitened = std::max(whitened, s);
    }
  }
  rep.nu_whitened = nd / (2.0 * static_cast<double>(r)) * whitened;

  if (with_cross_terms) {
    double best = 0.0;
    Matrix diff(n, r);
    for (Index i = 0; i < n; ++i) {
      for (Index k = 0; k < n; ++k) diff.row(k) = u.row(i) - u.row(k);
      const Matrix c = diff * diff.transpose();
      for (Index a = 0; a < n; ++a) {
        if (a == i) continue;
        for (Index b = a + 1; b < n; ++b) {
          if (b == i) continue;
          best = std::max(best, std::abs(c(a, b)));
        }
      }
    }
    rep.cross_term_max = best;
  }
  return rep;
}

double cross_coherence(const RankRGram& x, const IndexPair& a, const IndexPair& b) {
  require_index(x.n(), a);
  require_index(x.n(), b);
  const int dd = pair_dot(a, b);
  if (dd == 0) return 0.0;
  const Matrix& u = x.basis();
  const double uu = (u.row(a.i) - u.row(a.j)).dot(u.row(b.i) - u.row(b.j));
  return static_cast<double>(dd) * uu;
}

Matrix htilde_dense(const RankRGram& x) {
  if (x.n() > 60) throw Error(ErrorKind::too_large, "htilde_dense: n must be at most 60");
  const auto pairs = all_pairs(static_cast<int>(x.n()));
  const auto total = static_cast<Index>(pairs.size());
  Matrix h(total, total);
  for (Index a = 0; a < total; ++a)
    for (Index b = a; b < total; ++b) {
      h(a, b) = cross_coherence(x, pairs[static_cast<std::size_t>(a)], pairs[static_cast<std::size_t>(b)]);
      h(b, a) = h(a, b);
    }
  return h;
}

double htilde_lambda_max(const RankRGram& x) {
  const Index n = x.n();
  const Index r = x.rank();
  if (r == 0 || n < 2) return 0.0;
  const RowMajor u = x.basis();
  const Index dim = n * r;

  if (dim <= 1200) {
    // Block (k, l) of K K^T is the graph Laplacian with weights
    // (u_ik - u_jk)(u_il - u_jl).
    Matrix kkt = Matrix::Zero(dim, dim);
    for (Index k = 0; k < r; ++k) {
      for (Index l = k; l < r; ++l) {
        for (Index i = 0; i < n; ++i) {
          double diag = 0.0;
          for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = (u(i, k) - u(j, k)) * (u(i, l) - u(j, l));
            kkt(k * n + i, l * n + j) = -w;
            diag += w;
          }
          kkt(k * n + i, l * n + i) = diag;
        }
        if (l != k) kkt.block(l * n, k * n, n, n) = kkt.block(k * n, l * n, n, n).transpose();
      }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(kkt, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
  }

  Vector v = Vector::Ones(dim);
  for (Index i = 0; i < dim; ++i) v(i) += 1e-3 * static_cast<double>(i % 7);
  v.normalize();
  double theta = 0.0;
  for (int iter = 0; iter < 2000; ++iter) {
    const Vector y = apply_kkt(u, v);
    const double next = v.dot(y);
    const double norm = y.norm();
    if (!(norm > 0.0)) return 0.0;
    v = y / norm;
    if (iter > 0 && std::abs(next - theta) <= 1e-12 * std::abs(next)) return next;
    theta = next;
  }
  return theta;
}

HtildeBounds htilde_bounds(const RankRGram& x) {
  const Index n = x.n();
  const Index r = x.rank();
  HtildeBounds out;
  if (r == 0 || n < 2) return out;
  const RowMajor u = x.basis();
  double max_entry = 0.0;
  Vector dij(r);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      dij = (u.row(i) - u.row(j)).transpose();
      const double self = 2.0 * dij.squaredNorm();
      double row = self;
      max_entry = std::max(max_entry, self);
      for (Index k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const double a = std::abs(dij.dot((u.row(i) - u.row(k)).transpose()));
        const double b = std::abs(dij.dot((u.row(j) - u.row(k)).transpose()));
        row += a + b;
        max_entry = std::max({max_entry, a, b});
      }
      out.gershgorin = std::max(out.gershgorin, row);
    }
  }
  out.counting = (2.0 * static_cast<double>(n) - 3.0) * max_entry;
  return out;
}

RipEstimate rip_estimate(const RankRGram& x, std::span<const IndexPair> omega, double p, const RipOptions& opts) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "rip_estimate: p must lie in (0, 1]");
  if (opts.max_iters < 1) throw Error(ErrorKind::invalid_input, "rip_estimate: max_iters must be positive");
  const Index n = x.n();
  const Index r = x.rank();
  const int ni = static_cast<int>(n);
  const double p2 = p * p;
  const Matrix& u = x.basis();

  // Roundoff outside T intersect S is scaled by -p^2 and would eventually win.
  const auto clean = [&](const TangentVector& t) {
    Matrix z = t.zu() - u * (u.transpose() * t.zu());
    z.rowwise() -= z.colwise().mean();
    z -= u * (u.transpose() * z);
    const Matrix m = 0.5 * (t.m() + t.m().transpose());
    return TangentVector(x, m, z);
  };
  const auto apply = [&](const TangentVector& t) {
    const auto c = t.coefficients(omega);
    const TangentVector image = project_tangent(x, m_omega_apply(ni, omega, c, p));
    return image.plus(t, -p2);
  };

  Rng rng(opts.seed, 0x52495000ULL);
  Matrix m(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.normal();
  Matrix z(n, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i < n; ++i) z(i, j) = rng.normal();

  TangentVector v = clean(TangentVector(x, m, z));
  v = v.scaled(1.0 / v.norm());
  TangentVector y = clean(apply(v));
  double theta = y.norm();

  RipEstimate out;
  const double zero_scale = 1e-12 * p2;
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    out.iterations = iter;
    if (theta <= zero_scale) {
      out.epsilon = theta / p2;
      out.residual = 0.0;
      out.converged = true;
      return out;
    }
    v = y.scaled(1.0 / theta);
    y = clean(apply(v));
    theta = y.norm();
    const double lambda = v.inner(y);
    out.residual = y.plus(v, -lambda).norm() / std::max(theta, zero_scale);
    if (out.residual < opts.tol) {
      out.converged = true;
      break;
    }
  }
  out.epsilon = theta / p2;
  return out;
}

double pairwise_sum_identity_check(const RankRGram& x) {
  const RowMajor u = x.basis();
  double sum = 0.0;
  for (Index i = 0; i < u.rows(); ++i)
    for (Index j = i + 1; j < u.rows(); ++j) sum += (u.row(i) - u.row(j)).squaredNorm();
  return sum;
}

}  // namespace edmc
