#include "edmc/sampling.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "edmc/error.hpp"

namespace edmc {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

void SampledDistances::validate() const {
  if (n < 0) throw Error(ErrorKind::invalid_input, "samples: negative n");
  if (omega.size() != values.size()) {
    throw Error(ErrorKind::invalid_input, "samples: index and value counts differ");
  }
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const IndexPair& a = omega[k];
    if (a.i < 0 || a.j >= n || a.i >= a.j) {
      throw Error(ErrorKind::index_out_of_range, "samples: invalid index pair");
    }
    if (k > 0 && !(omega[k - 1] < a)) {
      throw Error(ErrorKind::invalid_input, "samples: indices not strictly increasing");
    }
    if (!std::isfinite(values[k]) || values[k] < -1e-12) {
      throw Error(ErrorKind::invalid_input, "samples: negative or non-finite squared distance");
    }
  }
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "samples: p outside [0,1]");
}

std::vector<IndexPair> bernoulli_sample(int n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "bernoulli_sample: p outside [0,1]");
  if (n < 0) throw Error(ErrorKind::invalid_input, "bernoulli_sample: negative n");
  Rng rng(seed);
  std::vector<IndexPair> omega;
  omega.reserve(static_cast<std::size_t>(p * static_cast<double>(pair_count(n)) * 1.1) + 16);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < p) omega.push_back({i, j});
  return omega;
}

std::vector<IndexPair> all_pairs(int n) {
  std::vector<IndexPair> omega;
  omega.reserve(static_cast<std::size_t>(pair_count(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) omega.push_back({i, j});
  return omega;
}

SampledDistances observe(const DenseSym& gram, std::vector<IndexPair> omega, std::optional<double> p) {
  SampledDistances out;
  out.n = static_cast<int>(gram.n());
  out.values.reserve(omega.size());
  for (const IndexPair& a : omega) {
    if (a.i < 0 || a.j >= out.n || a.i >= a.j) {
      throw Error(ErrorKind::index_out_of_range, "observe: index pair out of range");
    }
    out.values.push_back(gram(a.i, a.i) + gram(a.j, a.j) - 2.0 * gram(a.i, a.j));
  }
  out.omega = std::move(omega);
  const auto total = pair_count(out.n);
  out.p = p ? *p : (total > 0 ? static_cast<double>(out.omega.size()) / static_cast<double>(total) : 0.0);
  out.validate();
  return out;
}

PointCloud perturb_points(const PointCloud& points, const NoiseSpec& spec) {
  if (!(spec.bound >= 0.0)) throw Error(ErrorKind::invalid_input, "noise bound must be nonnegative");
  Rng rng(spec.seed);
  Matrix noisy = points.coords();
  for (Index i = 0; i < noisy.rows(); ++i)
    for (Index j = 0; j < noisy.cols(); ++j) noisy(i, j) += rng.uniform(-spec.bound, spec.bound);
  return PointCloud(std::move(noisy));
}

double oversampling_ratio(int n, int r, double p) {
  const double dof = static_cast<double>(n) * r - 0.5 * r * (r - 1.0);
  if (!(dof > 0.0)) throw Error(ErrorKind::invalid_input, "oversampling_ratio: degenerate degrees of freedom");
  return p * static_cast<double>(pair_count(n)) / dof;
}

double probability_for_ratio(int n, int r, double rho) {
  const double dof = static_cast<double>(n) * r - 0.5 * r * (r - 1.0);
  if (!(dof > 0.0) || pair_count(n) == 0) {
    throw Error(ErrorKind::invalid_input, "probability_for_ratio: degenerate degrees of freedom");
  }
  const double p = rho * dof / static_cast<double>(pair_count(n));
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::invalid_input, "probability_for_ratio: implied p outside [0,1]");
  }
  return p;
}

void write_samples_csv(std::ostream& out, const SampledDistances& samples) {
  out << "i,j,d\n" << std::setprecision(17);
  for (std::size_t k = 0; k < samples.omega.size(); ++k) {
    out << samples.omega[k].i << ',' << samples.omega[k].j << ',' << samples.values[k] << '\n';
  }
}

SampledDistances read_samples_csv(std::istream& in, int n) {
  SampledDistances out;
  out.n = n;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("i,j,d", 0) == 0) continue;
    std::istringstream fields(line);
    std::string a, b, c;
    if (!std::getline(fields, a, ',') || !std::getline(fields, b, ',') || !std::getline(fields, c) ||
        c.find(',') != std::string::npos) {
      throw Error(ErrorKind::invalid_input, "samples CSV: malformed line " + std::to_string(lineno));
    }
    try {
      std::size_t used = 0;
      const int i = std::stoi(a, &used);
      const int j = std::stoi(b);
      const double d = std::stod(c);
      out.omega.push_back({i, j});
      out.values.push_back(d);
    } catch (const std::exception&) {
      throw Error(ErrorKind::invalid_input, "samples CSV: unparsable line " + std::to_string(lineno));
    }
  }
  const auto total = pair_count(n);
  out.p = total > 0 ? static_cast<double>(out.omega.size()) / static_cast<double>(total) : 0.0;
  return out;
}

void write_samples(const std::filesystem::path& csv, const std::filesystem::path& sidecar,
                   const SampledDistances& samples) {
  std::ofstream out(csv);
  if (!out) throw Error(ErrorKind::io, "cannot write " + csv.string());
  write_samples_csv(out, samples);
  nlohmann::json meta = {{"n", samples.n}, {"p", samples.p}, {"m", samples.m()}};
  meta["seed"] = samples.seed ? nlohmann::json(*samples.seed) : nlohmann::json(nullptr);
  std::ofstream side(sidecar);
  if (!side) throw Error(ErrorKind::io, "cannot write " + sidecar.string());
  side << std::setw(2) << meta << '\n';
}

SampledDistances read_samples(const std::filesystem::path& csv, const std::filesystem::path& sidecar) {
  std::ifstream side(sidecar);
  if (!side) throw Error(ErrorKind::io, "cannot open " + sidecar.string());
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::invalid_input, std::string("samples sidecar: ") + e.what());
  }
  if (!meta.contains("n")) throw Error(ErrorKind::invalid_input, "samples sidecar: missing n");
  std::ifstream in(csv);
  if (!in) throw Error(ErrorKind::io, "cannot open " + csv.string());
  SampledDistances out = read_samples_csv(in, meta.at("n").get<int>());
  if (meta.contains("p") && meta["p"].is_number()) out.p = meta["p"].get<double>();
  if (meta.contains("seed") && meta["seed"].is_number_unsigned()) out.seed = meta["seed"].get<std::uint64_t>();
  out.validate();
  return out;
}

}  // namespace edmc
