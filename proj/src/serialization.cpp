#include "edmc/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>

#include "edmc/error.hpp"

#ifndef EDMC_VERSION_STRING
#define EDMC_VERSION_STRING "unknown"
#endif

namespace edmc {

std::string version_string() { return EDMC_VERSION_STRING; }

std::string config_hash(const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const RankRGram& x) {
  Json basis = Json::array();
  for (Index i = 0; i < x.n(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < x.rank(); ++k) row.push_back(x.basis()(i, k));
    basis.push_back(std::move(row));
  }
  Json eig = Json::array();
  for (Index k = 0; k < x.rank(); ++k) eig.push_back(x.eigenvalues()(k));
  return {{"n", x.n()}, {"r", x.rank()}, {"eigenvalues", eig}, {"basis", basis}};
}

RankRGram rank_r_gram_from_json(const Json& j) {
  try {
    const Index n = j.at("n").get<Index>();
    const Index r = j.at("r").get<Index>();
    const auto& eig = j.at("eigenvalues");
    const auto& basis = j.at("basis");
    if (static_cast<Index>(eig.size()) != r || static_cast<Index>(basis.size()) != n) {
      throw Error(ErrorKind::shape_mismatch, "factored Gram JSON: sizes disagree with n and r");
    }
    Vector lambda(r);
    for (Index k = 0; k < r; ++k) lambda(k) = eig[static_cast<std::size_t>(k)].get<double>();
    Matrix u(n, r);
    for (Index i = 0; i < n; ++i) {
      const auto& row = basis[static_cast<std::size_t>(i)];
      if (static_cast<Index>(row.size()) != r) throw Error(ErrorKind::shape_mismatch, "factored Gram JSON: ragged basis");
      for (Index k = 0; k < r; ++k) u(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return RankRGram(std::move(u), std::move(lambda));
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::invalid_input, std::string("factored Gram JSON: ") + e.what());
  }
}

Json to_json(const CoherenceReport& rep) {
  Json j = {{"n", rep.n},
            {"r", rep.r},
            {"nu", json_number(rep.nu)},
            {"nu_whitened", json_number(rep.nu_whitened)},
            {"nu_assumption", json_number(rep.nu_assumption())},
            {"assumption_scale", rep.assumption_scale},
            {"max_pair_sq", json_number(rep.max_pair_sq)},
            {"argmax_pair", {rep.argmax_pair.i, rep.argmax_pair.j}},
            {"lower_bound_stated", json_number(rep.lower_bound_stated)},
            {"lower_bound_derived", json_number(rep.lower_bound_derived)},
            {"upper_bound", json_number(rep.upper_bound)}};
  j["cross_term_max"] = rep.cross_term_max >= 0.0 ? json_number(rep.cross_term_max) : Json(nullptr);
  return j;
}

Json to_json(const RipEstimate& rip) {
  return {{"epsilon", json_number(rip.epsilon)},
          {"residual", json_number(rip.residual)},
          {"iterations", rip.iterations},
          {"converged", rip.converged}};
}

Json to_json(const SolverConfig& cfg) {
  return {{"max_iters", cfg.max_iters},
          {"rel_change_tol", cfg.rel_change_tol},
          {"step_epsilon", cfg.step_epsilon},
          {"divergence_factor", cfg.divergence_factor},
          {"step_mode", std::string(to_string(cfg.step_mode))}};
}

SolverConfig solver_config_from_json(const Json& j, SolverConfig cfg) {
  try {
    if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<int>();
    if (j.contains("rel_change_tol")) cfg.rel_change_tol = j["rel_change_tol"].get<double>();
    if (j.contains("step_epsilon")) cfg.step_epsilon = j["step_epsilon"].get<double>();
    if (j.contains("divergence_factor")) cfg.divergence_factor = j["divergence_factor"].get<double>();
    if (j.contains("step_mode")) cfg.step_mode = step_mode_from_string(j["step_mode"].get<std::string>());
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::invalid_input, std::string("solver config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

Json to_json(const DatasetSpec& spec) {
  Json j = {{"kind", std::string(to_string(spec.kind))}, {"n", spec.n}, {"r", spec.r}, {"seed", spec.seed}};
  if (spec.kind == DatasetKind::swiss_roll) {
    j["swiss_turns"] = spec.swiss_turns;
    j["swiss_height"] = spec.swiss_height;
  }
  if (spec.kind == DatasetKind::file) j["path"] = spec.path.string();
  return j;
}

DatasetSpec dataset_spec_from_json(const Json& j, DatasetSpec spec) {
  try {
    if (j.contains("kind")) spec.kind = dataset_kind_from_string(j["kind"].get<std::string>());
    if (j.contains("n")) spec.n = j["n"].get<int>();
    if (j.contains("r")) spec.r = j["r"].get<int>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("swiss_turns")) spec.swiss_turns = j["swiss_turns"].get<double>();
    if (j.contains("swiss_height")) spec.swiss_height = j["swiss_height"].get<double>();
    if (j.contains("path")) spec.path = j["path"].get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::invalid_input, std::string("dataset spec: ") + e.what());
  }
  return spec;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::invalid_input, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace edmc
