#include "colayers/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace colayers::io {

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw DataError("expected a JSON array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw DataError("expected a number in JSON array");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw DataError("expected a JSON array of rows");
  if (j.empty()) return Matrix(0, 0);
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(static_cast<Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = vector_from_json(j[r]);
    if (row.size() != cols) throw DataError("ragged matrix in JSON");
    m.row(static_cast<Index>(r)) = row.transpose();
  }
  return m;
}

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DataError(std::string("missing field '") + key + "'");
  return j.at(key);
}

Json schedule_to_json(const apps::Schedule& s) {
  Json out = Json::array();
  for (Index j : s) out.push_back(j);
  return out;
}

}  // namespace

Json to_json(const apps::GridInstance& inst) {
  Json j;
  j["height"] = inst.grid.height;
  j["width"] = inst.grid.width;
  j["connectivity"] = to_string(inst.grid.connectivity);
  j["features"] = matrix_to_json(inst.features);
  j["theta_bar"] = vector_to_json(inst.theta_bar);
  j["y_bar"] = vector_to_json(inst.y_bar);
  return j;
}

apps::GridInstance grid_instance_from_json(const Json& j) {
  apps::GridInstance inst;
  inst.grid.height = field(j, "height").get<Index>();
  inst.grid.width = field(j, "width").get<Index>();
  inst.grid.connectivity = connectivity_from_string(field(j, "connectivity").get<std::string>());
  inst.grid.validate();
  inst.features = matrix_from_json(field(j, "features"));
  inst.theta_bar = vector_from_json(field(j, "theta_bar"));
  inst.y_bar = vector_from_json(field(j, "y_bar"));
  require_same_size(inst.features.rows(), inst.grid.cells(), "grid instance features");
  require_same_size(inst.theta_bar.size(), inst.grid.cells(), "grid instance theta_bar");
  if (!is_valid_grid_path(inst.grid, inst.y_bar)) throw DataError("grid instance: y_bar is not a path");
  return inst;
}

Json to_json(const apps::SchedulingInstance& inst) {
  Json j;
  j["release"] = vector_to_json(inst.release);
  j["processing"] = vector_to_json(inst.processing);
  if (inst.optimal) {
    j["optimal"] = schedule_to_json(*inst.optimal);
    j["optimal_total"] = inst.optimal_total;
  }
  return j;
}

apps::SchedulingInstance scheduling_instance_from_json(const Json& j) {
  apps::SchedulingInstance inst;
  inst.release = vector_from_json(field(j, "release"));
  inst.processing = vector_from_json(field(j, "processing"));
  if (j.contains("optimal")) {
    inst.optimal = j.at("optimal").get<std::vector<Index>>();
    inst.optimal_total = field(j, "optimal_total").get<double>();
  }
  inst.validate();
  return inst;
}

Json to_json(const apps::TsstInstance& inst) {
  Json j;
  j["width"] = inst.width;
  j["first_stage"] = vector_to_json(inst.first_stage);
  j["second_stage"] = matrix_to_json(inst.second_stage);
  return j;
}

apps::TsstInstance tsst_instance_from_json(const Json& j) {
  apps::TsstInstance inst;
  inst.width = field(j, "width").get<Index>();
  if (inst.width < 2) throw DataError("tsst instance: width must be >= 2");
  inst.graph = make_grid_graph(inst.width);
  inst.first_stage = vector_from_json(field(j, "first_stage"));
  inst.second_stage = matrix_from_json(field(j, "second_stage"));
  inst.validate();
  return inst;
}

Json to_json(const Dataset& d) {
  Json j;
  j["schema"] = kDatasetSchema;
  j["app"] = d.app;
  j["params"] = d.params;
  j["instances"] = d.instances;
  return j;
}

Dataset dataset_from_json(const Json& j) {
  if (field(j, "schema").get<std::string>() != kDatasetSchema) {
    throw DataError("unsupported dataset schema '" + j.at("schema").get<std::string>() + "'");
  }
  Dataset d;
  d.app = field(j, "app").get<std::string>();
  d.params = j.value("params", Json::object());
  d.instances = field(j, "instances");
  return d;
}

namespace {

void require_app(const Dataset& d, const char* app) {
  if (d.app != app) throw ConfigError("dataset holds '" + d.app + "' instances, expected '" + app + "'");
}

}  // namespace

std::vector<apps::GridInstance> grid_instances(const Dataset& d) {
  require_app(d, "grid");
  std::vector<apps::GridInstance> out;
  for (const Json& r : d.instances) out.push_back(grid_instance_from_json(r));
  return out;
}

std::vector<apps::SchedulingInstance> scheduling_instances(const Dataset& d) {
  require_app(d, "scheduling");
  std::vector<apps::SchedulingInstance> out;
  for (const Json& r : d.instances) out.push_back(scheduling_instance_from_json(r));
  return out;
}

std::vector<apps::TsstInstance> tsst_instances(const Dataset& d) {
  require_app(d, "tsst");
  std::vector<apps::TsstInstance> out;
  for (const Json& r : d.instances) out.push_back(tsst_instance_from_json(r));
  return out;
}

std::string instance_hash(const Json& record) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : record.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

Json to_json(const BoundsCache& cache) {
  Json entries = Json::object();
  for (const auto& [hash, r] : cache) {
    Json e;
    e["lower"] = r.lower;
    e["upper"] = r.upper;
    e["forest"] = vector_to_json(r.forest);
    e["iterations"] = r.iterations;
    entries[hash] = e;
  }
  Json j;
  j["schema"] = kBoundsSchema;
  j["entries"] = entries;
  return j;
}

BoundsCache bounds_from_json(const Json& j) {
  if (field(j, "schema").get<std::string>() != kBoundsSchema) throw DataError("unsupported bounds schema");
  BoundsCache cache;
  for (const auto& [hash, e] : field(j, "entries").items()) {
    cache[hash] = {field(e, "lower").get<double>(), field(e, "upper").get<double>(),
                   vector_from_json(field(e, "forest")), field(e, "iterations").get<int>()};
  }
  return cache;
}

apps::LagrangianState to_state(const BoundsRecord& r) {
  apps::LagrangianState s;
  s.lower = r.lower;
  s.upper = r.upper;
  s.best_forest = r.forest;
  s.iterations = r.iterations;
  return s;
}

BoundsRecord to_record(const apps::LagrangianState& s) {
  return {s.lower, s.upper, s.best_forest, s.iterations};
}

Json to_json(const Checkpoint& c) {
  Json j;
  j["schema"] = kModelSchema;
  j["app"] = c.app;
  j["loss"] = c.loss;
  j["epsilon"] = c.epsilon;
  j["nb_samples"] = c.nb_samples;
  j["seed"] = c.seed;
  j["best_epoch"] = c.best_epoch;
  j["activation"] = to_string(c.model.activation);
  j["use_bias"] = c.model.use_bias;
  j["bias"] = c.model.bias;
  j["weights"] = vector_to_json(c.model.weights);
  j["feature_scales"] = vector_to_json(c.feature_scales);
  return j;
}

Checkpoint checkpoint_from_json(const Json& j) {
  if (field(j, "schema").get<std::string>() != kModelSchema) throw DataError("unsupported model schema");
  Checkpoint c;
  c.app = field(j, "app").get<std::string>();
  c.loss = field(j, "loss").get<std::string>();
  c.epsilon = field(j, "epsilon").get<double>();
  c.nb_samples = field(j, "nb_samples").get<int>();
  c.seed = field(j, "seed").get<std::uint64_t>();
  c.best_epoch = field(j, "best_epoch").get<int>();
  c.model.activation = activation_from_string(field(j, "activation").get<std::string>());
  c.model.use_bias = field(j, "use_bias").get<bool>();
  c.model.bias = field(j, "bias").get<double>();
  c.model.weights = vector_from_json(field(j, "weights"));
  c.feature_scales = vector_from_json(field(j, "feature_scales"));
  require_same_size(c.feature_scales.size(), c.model.weights.size(), "checkpoint feature scales");
  return c;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string out = "epoch,train_loss,val_loss,val_gap\n";
  for (const EpochRecord& r : history) {
    out += std::to_string(r.epoch) + "," + format_double(r.train_loss) + "," +
           format_double(r.val_loss) + "," + format_double(r.val_gap) + "\n";
  }
  return out;
}

}  // namespace colayers::io
