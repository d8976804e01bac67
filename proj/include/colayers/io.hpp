#pragma once

// File formats: JSON datasets, model checkpoints and bounds caches, CSV
// histories and metrics. Doubles are written with round-trip precision, so
// identical runs produce identical bytes.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "colayers/apps/grid.hpp"
#include "colayers/apps/scheduling.hpp"
#include "colayers/apps/tsst.hpp"
#include "colayers/learn.hpp"

namespace colayers::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kDatasetSchema = "colayers.dataset/1";
inline constexpr const char* kModelSchema = "colayers.model/1";
inline constexpr const char* kBoundsSchema = "colayers.bounds/1";
inline constexpr const char* kManifestSchema = "colayers.manifest/1";

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);  // array of rows
Matrix matrix_from_json(const Json& j);

Json to_json(const apps::GridInstance& inst);
apps::GridInstance grid_instance_from_json(const Json& j);
Json to_json(const apps::SchedulingInstance& inst);
apps::SchedulingInstance scheduling_instance_from_json(const Json& j);
Json to_json(const apps::TsstInstance& inst);
apps::TsstInstance tsst_instance_from_json(const Json& j);

struct Dataset {
  std::string app;
  Json params;
  Json instances = Json::array();
};

Json to_json(const Dataset& d);
Dataset dataset_from_json(const Json& j);

std::vector<apps::GridInstance> grid_instances(const Dataset& d);
std::vector<apps::SchedulingInstance> scheduling_instances(const Dataset& d);
std::vector<apps::TsstInstance> tsst_instances(const Dataset& d);

// FNV-1a of the instance record, hex encoded.
std::string instance_hash(const Json& record);

struct BoundsRecord {
  double lower = 0.0;
  double upper = 0.0;
  Vertex forest;
  int iterations = 0;
};

using BoundsCache = std::map<std::string, BoundsRecord>;

Json to_json(const BoundsCache& cache);
BoundsCache bounds_from_json(const Json& j);
apps::LagrangianState to_state(const BoundsRecord& r);
BoundsRecord to_record(const apps::LagrangianState& s);

struct Checkpoint {
  std::string app;
  std::string loss;
  double epsilon = 0.0;
  int nb_samples = 0;
  std::uint64_t seed = 0;
  int best_epoch = 0;
  GlmModel model;  // acts on normalized features
  Vector feature_scales;
};

Json to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
// Two-space indented JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

// Shortest decimal that parses back to the same double.
std::string format_double(double x);

std::string history_csv(const std::vector<EpochRecord>& history);

}  // namespace colayers::io
