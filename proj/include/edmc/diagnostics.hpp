#pragma once

#include <cstdint>
#include <span>

#include "edmc/geometry.hpp"
#include "edmc/sampling.hpp"

namespace edmc {

// Incoherence of a rank-r Gram matrix with respect to {w_a}.
//
// nu is reported in the geometric convention max_{i<j} ||u_i - u_j||^2 =
// 2 nu r / n. The proof-side convention ||P_U w_a||_F <= sqrt(nu' r / (2n))
// gives nu' = assumption_scale * nu with assumption_scale = 8.
struct CoherenceReport {
  int n = 0;
  int r = 0;
  double nu = 0.0;
  double nu_whitened = 0.0;     // same quantity from the points U Lambda^{1/2}
  double max_pair_sq = 0.0;     // max ||u_i - u_j||^2
  IndexPair argmax_pair;
  double lower_bound_stated = 0.0;   // 1 + 2 / (n - 1)
  double lower_bound_derived = 0.0;  // n / (n - 1), from sum_{i<j} ||u_i - u_j||^2 = n r
  double upper_bound = 0.0;          // 2 n / r
  double assumption_scale = 8.0;
  // max |<P_U w_a, P_U w_b>| over distinct pairs sharing an index; negative
  // when not computed.
  double cross_term_max = -1.0;

  double nu_assumption() const { return assumption_scale * nu; }
};

// Throws invalid_input for rank 0. The cross-term scan costs O(n^3 r).
CoherenceReport incoherence_nu(const RankRGram& x, bool with_cross_terms = true);

// <P_U w_a, P_U w_b> with P_U Y = U U^T Y.
double cross_coherence(const RankRGram& x, const IndexPair& a, const IndexPair& b);

// H~ = [<P_U w_a, P_U w_b>]_{a,b in I}; guarded to n <= 60.
Matrix htilde_dense(const RankRGram& x);

// lambda_max(H~). H~ = K^T K for the Khatri-Rao feature matrix K whose columns
// are (U^T d_a) (x) d_a, so the nonzero spectrum is that of the rn x rn matrix
// K K^T. Dense for rn <= 1200, power iteration otherwise.
double htilde_lambda_max(const RankRGram& x);

// max_a sum_b |H~_ab| (exact row sums) and the cruder count bound
// (2n - 3) max_a,b |H~_ab|.
struct HtildeBounds {
  double gershgorin = 0.0;
  double counting = 0.0;
};
HtildeBounds htilde_bounds(const RankRGram& x);

struct RipOptions {
  int max_iters = 500;
  double tol = 1e-8;
  std::uint64_t seed = 0;
};

struct RipEstimate {
  double epsilon = 0.0;  // p^-2 ||P_T M_Omega P_T - p^2 P_T|| on T intersect S
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;  // false flags the estimate as approximate
};

// Power iteration over tangent vectors (M, Z) with Z orthogonal to [U, 1].
RipEstimate rip_estimate(const RankRGram& x, std::span<const IndexPair> omega, double p,
                         const RipOptions& opts = {});

// sum_{i<j} ||u_i - u_j||^2 by direct summation.
double pairwise_sum_identity_check(const RankRGram& x);

}  // namespace edmc
