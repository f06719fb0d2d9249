#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ecm/condition_pipeline.hpp"
#include "ecm/sampling.hpp"
#include "ecm/scene_io.hpp"
#include "ecm/tensor_io.hpp"

using namespace ecm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "ecm_cli_tests";
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, int threads = 0) {
  std::string cmd;
  if (threads > 0) cmd += "ECM_THREADS=" + std::to_string(threads) + " ";
  cmd += std::string(ECMSIM_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("overlap emits the ranked csv for the synthetic rig") {
  const fs::path out = work_dir() / "overlap.csv";
  REQUIRE(run("overlap --scene synthetic --query-view front --k 2 --out " + out.string()) == 0);
  const std::string csv = slurp(out);
  CHECK(csv.rfind("target_view,frame,fraction,hits,total\n", 0) == 0);
  CHECK(csv.find("front_left,0,0.232857143,3260,14000") != std::string::npos);
  CHECK(csv.find("front_right,0,") != std::string::npos);
}

TEST_CASE("a single candidate yields a single row, cross-frame tokens work") {
  const fs::path out = work_dir() / "single.csv";
  REQUIRE(run("overlap --scene synthetic --query-view front --candidates front@1 --k 3 --out " +
              out.string()) == 0);
  const std::string csv = slurp(out);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one row
  CHECK(csv.find("front,1,") != std::string::npos);
}

TEST_CASE("verify accepts explicit pairs on scene files") {
  const fs::path scene_path = work_dir() / "file_scene.json";
  std::ofstream(scene_path) << scene_to_json(synthetic_scene_description()).dump();
  const fs::path out = work_dir() / "file_verify.json";
  REQUIRE(run("verify --scene " + scene_path.string() +
              " --pairs front@0:front@0,front@0:front_left@0 --out " + out.string()) == 0);
  const json doc = json::parse(slurp(out));
  REQUIRE(doc["pairs"].size() == 2);
  CHECK(doc["pairs"][0]["match_rate"].get<double>() == 1.0);  // identity pair
  CHECK(doc["pairs"][1]["coverage"].get<double>() > 0.0);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run("overlap --scene synthetic --k 0") == 2);
  CHECK(run("overlap --scene synthetic --query-view nope") == 2);
  CHECK(run("overlap --scene synthetic --grid bogus") == 2);
  CHECK(run("overlap --scene synthetic --anchors 60:1:10") == 2);
  CHECK(run("sample --mode sideways") == 2);
  CHECK(run("bogus-subcommand") == 2);
}

TEST_CASE("malformed scene files exit with code 3") {
  const fs::path bad = work_dir() / "bad_scene.json";
  std::ofstream(bad) << "{ not json";
  CHECK(run("overlap --scene " + bad.string()) == 3);

  std::ofstream(bad) << "{\"frames\": []}";
  CHECK(run("overlap --scene " + bad.string()) == 3);

  const fs::path missing_tensor = work_dir() / "missing.ecmt";
  fs::remove(missing_tensor);
  CHECK(run("inject --scene synthetic --latent-in " + missing_tensor.string() + " --out " +
            (work_dir() / "x.ecmt").string()) == 3);
}

TEST_CASE("sample output matches the library plan") {
  const fs::path out = work_dir() / "plan.json";
  REQUIRE(run("sample --window-len 12 --n-context 3 --seed 42 --out " + out.string()) == 0);
  const json doc = json::parse(slurp(out));
  const SamplingPlan plan = sample_training_frames(0, 12, 3, 42);
  CHECK(doc["generation_frame"].get<int>() == plan.generation_frame);
  CHECK(doc["context_frames"].get<std::vector<int>>() == plan.context_frames);

  const fs::path sched = work_dir() / "sched.json";
  REQUIRE(run("sample --mode chrono --frames 8 --n-hist 3 --out " + sched.string()) == 0);
  const json sdoc = json::parse(slurp(sched));
  CHECK(sdoc["steps"][5]["context_frames"].get<std::vector<int>>() ==
        std::vector<int>({4, 3, 2}));

  const fs::path rev = work_dir() / "rev.json";
  REQUIRE(run("sample --mode reverse --frames 11 --n-hist 3 --out " + rev.string()) == 0);
  const json rdoc = json::parse(slurp(rev));
  CHECK(rdoc["steps"][3]["generation_frame"].get<int>() == 7);
  CHECK(rdoc["steps"][3]["context_frames"].get<std::vector<int>>() ==
        std::vector<int>({8, 9, 10}));
}

TEST_CASE("verify reports a perfect identity pair") {
  const fs::path out = work_dir() / "verify.json";
  REQUIRE(run("verify --scene synthetic --pairs identity --out " + out.string()) == 0);
  const json doc = json::parse(slurp(out));
  REQUIRE(doc["pairs"].size() == 1);
  CHECK(doc["pairs"][0]["match_rate"].get<double>() == 1.0);
  CHECK(doc["pairs"][0]["coverage"].get<double>() == 1.0);
}

TEST_CASE("inject on an empty frame returns the latent bit-exactly") {
  // A one-frame scene with no boxes and no map elements.
  Scene scene = synthetic_scene_description();
  scene.frames.resize(1);
  scene.frames[0].boxes.clear();
  scene.frames[0].map_elements.clear();
  const fs::path scene_path = work_dir() / "empty_scene.json";
  std::ofstream(scene_path) << scene_to_json(scene).dump(2);

  const FeatureMap latent = FeatureMap::random(4, 28, 50, 7);
  const fs::path in = work_dir() / "latent_in.ecmt";
  write_tensor(in, to_tensor(latent));

  const fs::path out = work_dir() / "latent_out.ecmt";
  REQUIRE(run("inject --scene " + scene_path.string() + " --frame 0 --view front --latent-in " +
              in.string() + " --out " + out.string()) == 0);
  CHECK(slurp(in) == slurp(out));
}

TEST_CASE("inject replays exactly through the library pipeline") {
  const FeatureMap latent = FeatureMap::random(4, 28, 50, 8);
  const fs::path in = work_dir() / "replay_in.ecmt";
  write_tensor(in, to_tensor(latent));

  const fs::path out = work_dir() / "replay_out.ecmt";
  REQUIRE(run("inject --scene synthetic --frame 1 --view front --seed 5 --embed-dim 16 "
              "--latent-in " +
              in.string() + " --out " + out.string()) == 0);

  InjectConfig config;
  config.seed = 5;
  config.embed_dim = 16;
  const Scene scene = synthetic_scene_description();
  const FeatureMap expect = inject_frame_conditions(scene, 1, "front", latent, config);
  const Tensor got = read_tensor(out);
  REQUIRE(got.data.size() == expect.data.size());
  CHECK(std::memcmp(got.data.data(), expect.data.data(),
                    expect.data.size() * sizeof(float)) == 0);
  // The injection must actually have changed something.
  CHECK(std::memcmp(got.data.data(), latent.data.data(),
                    latent.data.size() * sizeof(float)) != 0);
}

TEST_CASE("render writes a ppm and matching tensors") {
  const fs::path ppm = work_dir() / "front.ppm";
  const fs::path rgb = work_dir() / "front_rgb.ecmt";
  const fs::path depth = work_dir() / "front_depth.ecmt";
  REQUIRE(run("render --scene synthetic --view front --grid 28x50 --out " + ppm.string() +
              " --rgb-out " + rgb.string() + " --depth-out " + depth.string()) == 0);
  CHECK(slurp(ppm).rfind("P6\n50 28\n255\n", 0) == 0);
  const Tensor t = read_tensor(rgb);
  CHECK(t.dims == std::vector<uint32_t>({3, 28, 50}));
  const Tensor d = read_tensor(depth);
  CHECK(d.dims == std::vector<uint32_t>({28, 50}));
}

TEST_CASE("every command is byte-deterministic and thread-count independent") {
  struct Case {
    const char* name;
    std::string args;
  };
  const fs::path dir = work_dir();
  const FeatureMap latent = FeatureMap::random(4, 28, 50, 9);
  write_tensor(dir / "det_in.ecmt", to_tensor(latent));

  const std::vector<Case> cases = {
      {"overlap", "overlap --scene synthetic --query-view front --k 5 --out "},
      {"verify", "verify --scene synthetic --out "},
      {"sample", "sample --window-len 12 --n-context 3 --seed 7 --out "},
      {"inject", "inject --scene synthetic --frame 0 --view front --seed 3 --latent-in " +
                     (dir / "det_in.ecmt").string() + " --out "},
      {"render", "render --scene synthetic --view front_left --grid 28x50 --rgb-out "},
  };
  for (const Case& c : cases) {
    CAPTURE(c.name);
    const fs::path a = dir / (std::string(c.name) + "_a.bin");
    const fs::path b = dir / (std::string(c.name) + "_b.bin");
    REQUIRE(run(c.args + a.string(), 1) == 0);
    REQUIRE(run(c.args + b.string(), 4) == 0);
    const std::string bytes_a = slurp(a);
    CHECK(!bytes_a.empty());
    CHECK(bytes_a == slurp(b));
  }
}
