#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "edmc/geometry.hpp"

namespace edmc {

enum class DatasetKind { sphere_surface, swiss_roll, unit_ball_uniform, file };

std::string_view to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(std::string_view name);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::sphere_surface;
  int n = 0;
  int r = 3;  // ambient dimension for generators
  std::uint64_t seed = 0;
  double swiss_turns = 1.5;   // t ranges over turns * pi * [1, 3]
  double swiss_height = 21.0;
  std::filesystem::path path;  // file kind only

  void validate() const;
};

// Points before centering (file kind: as read).
PointCloud generate_raw(const DatasetSpec& spec);
// Centered point cloud.
PointCloud generate(const DatasetSpec& spec);

}  // namespace edmc
