#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "edmc/geometry.hpp"

namespace edmc {

// Zero-based strict upper-triangle index (i < j).
struct IndexPair {
  int i = 0;
  int j = 0;

  friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

inline std::int64_t pair_count(std::int64_t n) { return n * (n - 1) / 2; }

// Seedable PRNG. Child streams are derived deterministically from
// (seed, stream) so independent consumers never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  Rng split(std::uint64_t stream) const { return Rng(seed_, stream_ * 0x9E3779B97F4A7C15ULL + stream + 1); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double uniform() { return uniform_(engine_); }  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct SampledDistances {
  int n = 0;
  std::vector<IndexPair> omega;  // strictly increasing
  std::vector<double> values;    // squared distances aligned with omega
  double p = 0.0;                // Bernoulli parameter, or m / L when unknown
  std::optional<std::uint64_t> seed;

  std::size_t m() const { return omega.size(); }
  // Throws invalid_input when an invariant is violated.
  void validate() const;
};

struct NoiseSpec {
  double bound = 0.0;  // max-absolute-entry of the perturbation
  std::uint64_t seed = 0;
};

std::vector<IndexPair> bernoulli_sample(int n, double p, std::uint64_t seed);
std::vector<IndexPair> all_pairs(int n);

// values_a = X_ii + X_jj - 2 X_ij. p defaults to the empirical m / L.
SampledDistances observe(const DenseSym& gram, std::vector<IndexPair> omega,
                         std::optional<double> p = std::nullopt);

// P + N with N_ij i.i.d. uniform on [-bound, bound].
PointCloud perturb_points(const PointCloud& points, const NoiseSpec& spec);

// rho = p L / (n r - r (r - 1) / 2).
double oversampling_ratio(int n, int r, double p);
// Inverse of oversampling_ratio; throws when the implied p exceeds 1.
double probability_for_ratio(int n, int r, double rho);

// CSV (i,j,d) with a JSON sidecar {n, p, seed, m}.
void write_samples(const std::filesystem::path& csv, const std::filesystem::path& sidecar,
                   const SampledDistances& samples);
SampledDistances read_samples(const std::filesystem::path& csv, const std::filesystem::path& sidecar);
void write_samples_csv(std::ostream& out, const SampledDistances& samples);
SampledDistances read_samples_csv(std::istream& in, int n);

}  // namespace edmc
