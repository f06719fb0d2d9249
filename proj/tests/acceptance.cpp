// Acceptance suite: runs every top-level requirement at its stated tolerance
// and prints one pass/fail line per criterion. Exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "ecm/attention.hpp"
#include "ecm/condition_pipeline.hpp"
#include "ecm/control.hpp"
#include "ecm/correspondence.hpp"
#include "ecm/geometry.hpp"
#include "ecm/reference.hpp"
#include "ecm/rng.hpp"
#include "ecm/sampling.hpp"
#include "ecm/scene_io.hpp"
#include "ecm/scene_oracle.hpp"
#include "ecm/tensor_io.hpp"
#include "test_util.hpp"

using namespace ecm;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ViewRef rig_view(const std::vector<CameraModel>& rig, std::string_view id) {
  return {0, rig_camera(rig, id), EgoPose(Eigen::Matrix4d::Identity(), 0), ViewKind::current};
}

// ---- 1. projection round trip -------------------------------------------

void criterion_round_trip() {
  std::mt19937_64 eng(20240601);
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 10000; ++i) {
    const CameraModel cam = test::random_camera(eng);
    const PixelCoord p{uniform(eng, 0.0, cam.width() - 1e-9),
                       uniform(eng, 0.0, cam.height() - 1e-9)};
    const double d = uniform(eng, 1.0, 60.0);
    const Projection back = project(back_project(p, cam, d), cam);
    require(back.valid, "round trip lost validity");
    require(std::abs(back.pixel.u - p.u) < 1e-6 && std::abs(back.pixel.v - p.v) < 1e-6,
            "reprojection error above 1e-6 px");
    require(std::abs(back.depth - d) / d < 1e-9, "depth error above 1e-9 relative");
  }
  require(seconds_since(start) < 1.0, "round trip exceeded 1 s");
}

// ---- 2. LID anchors -------------------------------------------------------

void criterion_lid_anchors() {
  const DepthAnchors a = make_lid_anchors(1.0, 60.0, 10);
  require(std::abs(a.values.front() - 2.0727272727272728) < 1e-9,
          "first anchor deviates from 2.0727");
  require(a.values.back() == 60.0, "last anchor must be exactly 60");
  for (int i = 2; i < a.count(); ++i) {
    require(a.values[i] - a.values[i - 1] >= a.values[i - 1] - a.values[i - 2] - 1e-9,
            "anchor gaps must be non-decreasing");
  }
}

// ---- 3. identity correspondence ------------------------------------------

void criterion_identity_field() {
  const auto rig = make_rig();
  const ViewRef front = rig_view(rig, "front");
  const CorrespondenceField field =
      build_field(front, front, make_lid_anchors(1.0, 60.0, 10), 28, 50);
  require(overlap(field).fraction == 1.0, "identity overlap must be exactly 1");
  for (int h = 0; h < 28; ++h) {
    for (int w = 0; w < 50; ++w) {
      for (int i = 0; i < 10; ++i) {
        const PixelCoord p = field.target_at(h, w, i);
        require(p.u == w + 0.5 && p.v == h + 0.5, "identity targets must be pixel centers");
        require(field.valid_at(h, w, i), "identity field must be fully valid");
      }
    }
  }
}

// ---- 4. oracle verification ----------------------------------------------

void criterion_oracle_verification() {
  const auto start = std::chrono::steady_clock::now();
  const SyntheticScene scene = checker_scene();
  const auto rig = make_rig();
  const DepthAnchors anchors = make_lid_anchors(1.0, 60.0, 10);

  const ViewRef front = rig_view(rig, "front");
  ViewRef moved = front;
  moved.camera = front.camera.translated({0.0, 0.5, 0.0});

  const RenderedView qv = render(scene, front.camera, front.pose, 28, 50);
  const RenderedView tv = render(scene, moved.camera, moved.pose, 28, 50);
  const VerifyReport translated =
      verify_correspondence(qv, tv, build_field(front, moved, anchors, 28, 50));
  char buf[160];
  std::snprintf(buf, sizeof(buf), "translate pair: match %.4f (need >= 0.99)",
                translated.match_rate);
  require(translated.match_rate >= 0.99, buf);
  std::snprintf(buf, sizeof(buf), "translate pair: coverage %.4f (need >= 0.95)",
                translated.coverage);
  require(translated.coverage >= 0.95, buf);

  const ViewRef back = rig_view(rig, "back");
  const RenderedView bv = render(scene, back.camera, back.pose, 28, 50);
  const VerifyReport opposite =
      verify_correspondence(qv, bv, build_field(front, back, anchors, 28, 50));
  require(opposite.coverage == 0.0, "opposite pair must have zero coverage");
  require(seconds_since(start) < 10.0, "verification exceeded 10 s");
}

// ---- 5. overlap matching vs the exhaustive oracle -------------------------

void criterion_overlap_ranking() {
  const auto rig = make_rig();
  const DepthAnchors anchors = make_lid_anchors(1.0, 60.0, 10);
  // Golden fractions computed once by the exhaustive per-pixel oracle.
  const double kSideOfFront = 0.23285714285714285;  // 3260 / 14000
  const double kBackOfSide = 0.3;                   // 4200 / 14000
  const double kSideOfBack = 0.17;                  // 2380 / 14000

  for (const CameraModel& qcam : rig) {
    const ViewRef query = rig_view(rig, qcam.view_id());
    std::vector<ViewRef> candidates;
    for (const CameraModel& c : rig) {
      if (c.view_id() != qcam.view_id()) candidates.push_back(rig_view(rig, c.view_id()));
    }
    const auto fast = match_target_views(query, candidates, 5, anchors, 28, 50);
    const auto oracle = ref::rank_by_overlap(query, candidates, anchors, 28, 50);
    require(fast.size() == oracle.size(), "ranking sizes differ");
    for (size_t i = 0; i < fast.size(); ++i) {
      require(fast[i].candidate_index == oracle[i].candidate_index,
              "ranking order deviates from the brute-force oracle for " + qcam.view_id());
      require(std::abs(fast[i].score.fraction - oracle[i].fraction) < 1e-9,
              "fraction deviates from the brute-force oracle");
    }

    const std::set<std::string> top2 = {fast[0].view.camera.view_id(),
                                        fast[1].view.camera.view_id()};
    if (qcam.view_id() == "front") {
      require(top2 == std::set<std::string>({"front_left", "front_right"}),
              "front top-2 must be the flanking cameras");
      require(std::abs(fast[0].score.fraction - kSideOfFront) < 1e-9 &&
                  std::abs(fast[1].score.fraction - kSideOfFront) < 1e-9,
              "front golden fraction drifted");
    }
    if (qcam.view_id() == "back") {
      require(top2 == std::set<std::string>({"back_left", "back_right"}),
              "rear top-2 must be the +-110 degree cameras");
      require(std::abs(fast[0].score.fraction - kSideOfBack) < 1e-9,
              "rear golden fraction drifted");
    }
    if (qcam.view_id() == "back_left" || qcam.view_id() == "back_right") {
      require(std::abs(fast[0].score.fraction - kBackOfSide) < 1e-9,
              "side-to-back golden fraction drifted");
    }
  }
}

// ---- 6. aggregation oracle equivalence ------------------------------------

void criterion_aggregate_equivalence() {
  std::mt19937_64 eng(606060);
  const DepthAnchors anchors = make_lid_anchors(1.0, 60.0, 10);
  for (int trial = 0; trial < 100; ++trial) {
    const int h = 4 + static_cast<int>(bounded(eng, 13));
    const int w = 4 + static_cast<int>(bounded(eng, 13));
    const int c = 1 + static_cast<int>(bounded(eng, 8));

    Eigen::Matrix3d k;
    k << 30.0 + uniform(eng, 0.0, 30.0), 0.0, w / 2.0, 0.0, 30.0 + uniform(eng, 0.0, 30.0),
        h / 2.0, 0.0, 0.0, 1.0;
    const CameraModel qcam(k, Eigen::Matrix4d::Identity(), w, h, "q");
    const ViewRef query_view = test::identity_view(qcam);

    std::vector<CorrespondenceField> fields;
    std::vector<FeatureMap> maps;
    for (int v = 0; v < 3; ++v) {
      ViewRef tv = query_view;
      tv.camera = qcam.translated(
          {uniform(eng, -1.5, 1.5), uniform(eng, -1.5, 1.5), uniform(eng, -0.5, 0.5)});
      fields.push_back(build_field(query_view, tv, anchors, h, w));
      maps.push_back(FeatureMap::random(c, h, w, 7000 + trial * 3 + v));
    }
    std::vector<AggregateTarget> targets;
    for (int v = 0; v < 3; ++v) targets.push_back({&maps[v], &fields[v]});

    const FeatureMap query = FeatureMap::random(c, h, w, 9000 + trial);
    const DepthWeightHead head = DepthWeightHead::seeded(c, c, 10, 11000 + trial);

    const FeatureMap fast = aggregate(query, targets, head);
    const FeatureMap naive = ref::aggregate(query, targets, head);
    for (size_t i = 0; i < fast.data.size(); ++i) {
      require(std::abs(fast.data[i] - naive.data[i]) < 1e-6,
              "vectorized aggregate deviates from the naive loop");
    }
  }
}

// ---- 7. scatter/gather adjointness ----------------------------------------

void criterion_adjointness() {
  std::mt19937_64 eng(707070);
  Eigen::Matrix3d k;
  k << 100.0, 0.0, 200.0, 0.0, 100.0, 100.0, 0.0, 0.0, 1.0;
  const CameraModel cam(k, Eigen::Matrix4d::Identity(), 400, 200, "adj");
  const CameraModel grid_cam = cam.scaled_to(16, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    const int channels = 1 + static_cast<int>(bounded(eng, 4));
    const FeatureMap f = FeatureMap::random(channels, 8, 16, 50000 + trial);
    ConditionEmbedding e;
    e.vector.resize(channels);
    for (float& v : e.vector) v = static_cast<float>(uniform(eng, -2.0, 2.0));
    const int kp_count = 1 + static_cast<int>(bounded(eng, 5));
    std::vector<PixelCoord> px(kp_count);
    for (int j = 0; j < kp_count; ++j) {
      px[j] = {uniform(eng, 1.0, 15.0), uniform(eng, 1.0, 7.0)};  // interior support
      e.keypoints.push_back(
          {back_project(px[j], grid_cam, uniform(eng, 2.0, 40.0)), 1.0 / kp_count});
    }
    const FeatureMap scattered = scatter_inject(FeatureMap(channels, 8, 16), e, cam);
    double lhs = 0.0;
    for (size_t i = 0; i < scattered.data.size(); ++i) {
      lhs += static_cast<double>(scattered.data[i]) * f.data[i];
    }
    double rhs = 0.0;
    for (int j = 0; j < kp_count; ++j) {
      const std::vector<float> g = ref::gather_bilinear(f, px[j]);
      for (int c = 0; c < channels; ++c) {
        rhs += e.keypoints[j].weight * static_cast<double>(e.vector[c]) * g[c];
      }
    }
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    require(std::abs(lhs - rhs) / scale < 1e-6, "adjointness identity violated");
  }
}

// ---- 8. residual neutrality ------------------------------------------------

void criterion_residual_neutrality() {
  // All-invalid masks through aggregate.
  Eigen::Matrix3d k;
  k << 20.0, 0.0, 8.0, 0.0, 20.0, 6.0, 0.0, 0.0, 1.0;
  const CameraModel cam(k, Eigen::Matrix4d::Identity(), 16, 12, "rn");
  const ViewRef view{0, cam, EgoPose(Eigen::Matrix4d::Identity(), 0), ViewKind::current};
  CorrespondenceField field = build_field(view, view, make_lid_anchors(1.0, 60.0, 6), 12, 16);
  std::fill(field.valid.begin(), field.valid.end(), uint8_t{0});

  const FeatureMap query = FeatureMap::random(5, 12, 16, 808);
  const FeatureMap tmap = FeatureMap::random(5, 12, 16, 809);
  const AggregateTarget target{&tmap, &field};
  const FeatureMap out = aggregate(query, {&target, 1}, DepthWeightHead::seeded(5, 5, 6, 810));
  require(std::memcmp(out.data.data(), query.data.data(),
                      query.data.size() * sizeof(float)) == 0,
          "all-invalid aggregate must return the query bit-exactly");

  // Empty box list through the scatter pipeline.
  Scene scene = synthetic_scene_description();
  scene.frames.resize(1);
  scene.frames[0].boxes.clear();
  scene.frames[0].map_elements.clear();
  const FeatureMap latent = FeatureMap::random(4, 28, 50, 811);
  const FeatureMap injected = inject_frame_conditions(scene, 0, "front", latent, InjectConfig{});
  require(std::memcmp(injected.data.data(), latent.data.data(),
                      latent.data.size() * sizeof(float)) == 0,
          "empty frame must leave the latent bit-identical");

  ConditionEmbedding empty;
  empty.vector.assign(4, 1.0f);
  const FeatureMap scattered = scatter_inject(latent, empty, rig_camera(make_rig(), "front"));
  require(std::memcmp(scattered.data.data(), latent.data.data(),
                      latent.data.size() * sizeof(float)) == 0,
          "keypoint-free scatter must leave the latent bit-identical");
}

// ---- 9. sampler statistics --------------------------------------------------

void criterion_sampler_statistics() {
  constexpr int kTrials = 100000;
  int counts[12] = {};
  for (int seed = 0; seed < kTrials; ++seed) {
    const SamplingPlan plan = sample_training_frames(0, 12, 3, seed);
    for (int f : plan.context_frames) ++counts[f];
    ++counts[plan.generation_frame];
  }
  for (int f = 0; f < 12; ++f) {
    const double freq = static_cast<double>(counts[f]) / kTrials;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "frame %d frequency %.4f outside 1/3 +- 0.01", f, freq);
    require(std::abs(freq - 1.0 / 3.0) < 0.01, buf);
  }

  const InferenceSchedule fwd = build_inference_schedule(11, ScheduleMode::chronological, 1, 3);
  const InferenceSchedule rev = build_inference_schedule(11, ScheduleMode::reverse, 1, 3);
  require(fwd.steps.size() == rev.steps.size(), "schedule sizes differ");
  for (size_t i = 0; i < fwd.steps.size(); ++i) {
    require(rev.steps[i].generation_frame == 10 - fwd.steps[i].generation_frame,
            "reverse schedule is not the mirror");
    require(rev.steps[i].context_frames.size() == fwd.steps[i].context_frames.size(),
            "mirror context sizes differ");
    for (size_t j = 0; j < fwd.steps[i].context_frames.size(); ++j) {
      require(rev.steps[i].context_frames[j] == 10 - fwd.steps[i].context_frames[j],
              "mirror context frames differ");
    }
  }
}

// ---- 10. CLI determinism ----------------------------------------------------

void criterion_cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / "ecm_acceptance";
  fs::create_directories(dir);
  const FeatureMap latent = FeatureMap::random(4, 28, 50, 1010);
  write_tensor(dir / "latent.ecmt", to_tensor(latent));

  const std::vector<std::string> commands = {
      "overlap --scene synthetic --query-view front --candidates "
      "front_left,front_right,back_left,back_right,back --k 5 --grid 28x50 --anchors 1:60:10 "
      "--out ",
      "verify --scene synthetic --pairs identity,translate,opposite --out ",
      "sample --window-len 12 --n-context 3 --seed 42 --out ",
      "sample --mode reverse --frames 10 --stride 1 --n-hist 3 --out ",
      "inject --scene synthetic --frame 0 --view front --seed 9 --latent-in " +
          (dir / "latent.ecmt").string() + " --out ",
      "render --scene synthetic --view front --grid 56x100 --rgb-out ",
  };
  int idx = 0;
  for (const std::string& cmd : commands) {
    const fs::path a = dir / ("out_a_" + std::to_string(idx));
    const fs::path b = dir / ("out_b_" + std::to_string(idx));
    ++idx;
    const std::string run_a =
        "ECM_THREADS=1 " + std::string(ECMSIM_BIN) + " " + cmd + a.string() + " >/dev/null 2>&1";
    const std::string run_b =
        "ECM_THREADS=4 " + std::string(ECMSIM_BIN) + " " + cmd + b.string() + " >/dev/null 2>&1";
    require(WEXITSTATUS(std::system(run_a.c_str())) == 0, "command failed: " + cmd);
    require(WEXITSTATUS(std::system(run_b.c_str())) == 0, "rerun failed: " + cmd);

    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(fa)),
                              std::istreambuf_iterator<char>());
    const std::string bytes_b((std::istreambuf_iterator<char>(fb)),
                              std::istreambuf_iterator<char>());
    require(!bytes_a.empty(), "empty output: " + cmd);
    require(bytes_a == bytes_b, "outputs differ across ECM_THREADS for: " + cmd);
  }
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* label;
    std::function<void()> body;
  };
  const std::vector<Criterion> criteria = {
      {1, "projection round trip (1e4 triples, <1e-6 px, <1e-9 depth, <1 s)",
       criterion_round_trip},
      {2, "LID anchors (1,60,10) match hand-derived values to 1e-9", criterion_lid_anchors},
      {3, "identity correspondence is exact with overlap 1.0", criterion_identity_field},
      {4, "ray-cast oracle verification (translate >=0.99/0.95, opposite 0, <10 s)",
       criterion_oracle_verification},
      {5, "overlap ranking reproduces the brute-force oracle on the 6-camera rig",
       criterion_overlap_ranking},
      {6, "vectorized aggregation matches the naive loop within 1e-6",
       criterion_aggregate_equivalence},
      {7, "scatter/gather adjointness within 1e-6 relative over 1e3 instances",
       criterion_adjointness},
      {8, "all-invalid masks and empty box lists are bit-neutral",
       criterion_residual_neutrality},
      {9, "sampler marginals within 1 percent; reverse mirrors chronological",
       criterion_sampler_statistics},
      {10, "CLI outputs byte-identical across reruns and ECM_THREADS",
       criterion_cli_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    try {
      c.body();
      std::printf("[PASS] criterion %2d: %s\n", c.id, c.label);
    } catch (const std::exception& e) {
      ++failures;
      std::printf("[FAIL] criterion %2d: %s\n        %s\n", c.id, c.label, e.what());
    }
    std::fflush(stdout);
  }
  if (failures == 0) {
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  } else {
    std::printf("%d acceptance criteria FAILED\n", failures);
  }
  return failures;
}
