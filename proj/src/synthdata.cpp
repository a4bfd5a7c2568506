#include "edmc/synthdata.hpp"

#include <cmath>
#include <numbers>

#include "edmc/error.hpp"
#include "edmc/sampling.hpp"

namespace edmc {

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::sphere_surface: return "sphere_surface";
    case DatasetKind::swiss_roll: return "swiss_roll";
    case DatasetKind::unit_ball_uniform: return "unit_ball_uniform";
    case DatasetKind::file: return "file";
  }
  return "unknown";
}

DatasetKind dataset_kind_from_string(std::string_view name) {
  if (name == "sphere_surface" || name == "sphere") return DatasetKind::sphere_surface;
  if (name == "swiss_roll") return DatasetKind::swiss_roll;
  if (name == "unit_ball_uniform" || name == "ball") return DatasetKind::unit_ball_uniform;
  if (name == "file") return DatasetKind::file;
  throw Error(ErrorKind::invalid_input, "unknown dataset kind '" + std::string(name) + "'");
}

void DatasetSpec::validate() const {
  if (kind == DatasetKind::file) {
    if (path.empty()) throw Error(ErrorKind::invalid_input, "dataset: file kind needs a path");
    return;
  }
  if (r < 1) throw Error(ErrorKind::invalid_input, "dataset: dimension must be at least 1");
  if (n < r + 1) throw Error(ErrorKind::invalid_input, "dataset: need n >= r + 1");
  if (kind == DatasetKind::swiss_roll && r != 3) {
    throw Error(ErrorKind::invalid_input, "dataset: swiss roll is three dimensional");
  }
  if (kind == DatasetKind::swiss_roll && !(swiss_turns > 0.0 && swiss_height > 0.0)) {
    throw Error(ErrorKind::invalid_input, "dataset: swiss roll turns and height must be positive");
  }
}

PointCloud generate_raw(const DatasetSpec& spec) {
  spec.validate();
  if (spec.kind == DatasetKind::file) return read_points_csv(spec.path);

  Rng rng(spec.seed);
  Matrix coords(spec.n, spec.r);
  switch (spec.kind) {
    case DatasetKind::sphere_surface:
      for (Index i = 0; i < spec.n; ++i) {
        for (Index k = 0; k < spec.r; ++k) coords(i, k) = rng.normal();
        coords.row(i).normalize();
      }
      break;
    case DatasetKind::unit_ball_uniform:
      for (Index i = 0; i < spec.n; ++i) {
        for (Index k = 0; k < spec.r; ++k) coords(i, k) = rng.normal();
        coords.row(i).normalize();
        coords.row(i) *= std::pow(rng.uniform(), 1.0 / spec.r);
      }
      break;
    case DatasetKind::swiss_roll:
      for (Index i = 0; i < spec.n; ++i) {
        const double t = spec.swiss_turns * std::numbers::pi * (1.0 + 2.0 * rng.uniform());
        const double h = spec.swiss_height * rng.uniform();
        coords(i, 0) = t * std::cos(t);
        coords(i, 1) = h;
        coords(i, 2) = t * std::sin(t);
      }
      break;
    case DatasetKind::file:
      break;
  }
  return PointCloud(std::move(coords));
}

PointCloud generate(const DatasetSpec& spec) { return center_points(generate_raw(spec)); }

}  // namespace edmc
