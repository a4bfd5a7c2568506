#pragma once

// JSON forms of the library types and the provenance fields stamped on every
// output artifact.

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "edmc/diagnostics.hpp"
#include "edmc/geometry.hpp"
#include "edmc/solver.hpp"
#include "edmc/synthdata.hpp"

namespace edmc {

using Json = nlohmann::json;

// git-describe style version baked in at configure time.
std::string version_string();

// FNV-1a 64 of the compact dump, as 16 hex digits.
std::string config_hash(const Json& config);

Json to_json(const RankRGram& x);
RankRGram rank_r_gram_from_json(const Json& j);

Json to_json(const CoherenceReport& report);
Json to_json(const RipEstimate& rip);

Json to_json(const SolverConfig& cfg);
// Fields absent from j keep their values in base.
SolverConfig solver_config_from_json(const Json& j, SolverConfig base = {});

Json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const Json& j, DatasetSpec base = {});

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

// Full-precision number, or null when not finite.
Json json_number(double v);

}  // namespace edmc
