#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "colayers/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "colayers_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + COLAYERS_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_count(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("cli: usage and configuration errors") {
  CHECK(cli("--help") == 0);
  CHECK(cli("--version") == 0);
  CHECK(cli("") == 2);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("generate --app grid") == 2);
  CHECK(cli("generate --app nope --out " + path("x.json")) == 2);
  CHECK(cli("generate --app grid --count 0 --out " + path("x.json")) == 2);
  CHECK(cli("--threads 0 generate --app grid --out " + path("x.json")) == 2);
}

TEST_CASE("cli: data errors") {
  CHECK(cli("train --data " + path("missing.json") + " --out " + path("m.json")) == 3);
  {
    std::ofstream(path("bad.json")) << "{ nope";
  }
  CHECK(cli("train --data " + path("bad.json") + " --out " + path("m.json")) == 3);
  {
    std::ofstream(path("schema.json")) << R"({"schema":"other","app":"grid","instances":[]})";
  }
  CHECK(cli("train --data " + path("schema.json") + " --out " + path("m.json")) == 3);
}

TEST_CASE("cli: generate, train, eval") {
  const std::string data = path("grid.json");
  REQUIRE(cli("--seed 5 generate --app grid --count 6 --k 4 --out " + data) == 0);
  const colayers::io::Dataset d = colayers::io::dataset_from_json(colayers::io::read_json(data));
  CHECK(d.app == "grid");
  CHECK(d.instances.size() == 6);
  const colayers::io::Json manifest = colayers::io::read_json(path("grid.manifest.json"));
  CHECK(manifest.at("schema") == colayers::io::kManifestSchema);
  CHECK(manifest.at("command") == "generate");
  CHECK(manifest.at("seed") == 5);

  const std::string model = path("model.json");
  REQUIRE(cli("train --data " + data + " --epochs 2 --nb-samples 4 --out " + model) == 0);
  const auto ckpt = colayers::io::checkpoint_from_json(colayers::io::read_json(model));
  CHECK(ckpt.app == "grid");
  CHECK(ckpt.loss == "fy_add");
  CHECK(ckpt.nb_samples == 4);
  CHECK(slurp(path("model.history.csv")).rfind("epoch,train_loss,val_loss,val_gap\n", 0) == 0);
  CHECK(line_count(slurp(path("model.history.csv"))) == 4);

  const std::string metrics = path("metrics.csv");
  REQUIRE(cli("eval --model " + model + " --data " + data + " --out " + metrics) == 0);
  const std::string m = slurp(metrics);
  CHECK(m.rfind("instance_id,gap_percent\n", 0) == 0);
  CHECK(line_count(m) == 7);
  CHECK(fs::exists(path("metrics.timings.csv")));

  // a grid model cannot evaluate scheduling data
  REQUIRE(cli("generate --app scheduling --count 2 --jobs 4 --out " + path("sched.json")) == 0);
  CHECK(cli("eval --model " + model + " --data " + path("sched.json") + " --out " + path("x.csv")) == 2);
  CHECK(cli("train --app tsst --data " + data + " --out " + path("x.json")) == 2);
}

TEST_CASE("cli: zero epochs still writes a checkpoint") {
  const std::string data = path("sched0.json");
  REQUIRE(cli("generate --app scheduling --count 4 --jobs 5 --out " + data) == 0);
  REQUIRE(cli("train --data " + data + " --epochs 0 --out " + path("m0.json")) == 0);
  const auto ckpt = colayers::io::checkpoint_from_json(colayers::io::read_json(path("m0.json")));
  CHECK(ckpt.best_epoch == 0);
  CHECK(ckpt.model.weights.isZero());
}

TEST_CASE("cli: manifest replay is byte-identical across thread counts") {
  const std::string data = path("tsst.json");
  REQUIRE(cli("--seed 3 generate --app tsst --count 3 --width 3 --label --out " + data) == 0);
  REQUIRE(cli("--seed 4 --threads 1 train --data " + data + " --epochs 2 --out " + path("t1.json")) == 0);
  const std::string first = slurp(path("t1.json"));
  const std::string history = slurp(path("t1.history.csv"));
  const colayers::io::Json manifest = colayers::io::read_json(path("t1.manifest.json"));
  for (const auto& a : manifest.at("argv")) CHECK(a.get<std::string>() != "--threads");
  fs::remove(path("t1.json"));
  fs::remove(path("t1.history.csv"));
  REQUIRE(cli("--from-manifest " + path("t1.manifest.json") + " --threads 4") == 0);
  CHECK(slurp(path("t1.json")) == first);
  CHECK(slurp(path("t1.history.csv")) == history);
  CHECK(colayers::io::read_json(path("t1.manifest.json")).at("threads") == 4);
  CHECK(cli("--from-manifest " + path("t1.json")) == 3);
}
