// Parallel kernels vs the serial reference implementations, plus thread
// scaling of the renderer. Run: ./ecm_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include "ecm/attention.hpp"
#include "ecm/correspondence.hpp"
#include "ecm/parallel.hpp"
#include "ecm/reference.hpp"
#include "ecm/scene_oracle.hpp"

namespace {

using namespace ecm;

struct FieldSetup {
  ViewRef query;
  ViewRef target;
  DepthAnchors anchors;

  FieldSetup()
      : query{0, rig_camera(make_rig(), "front"), EgoPose(Eigen::Matrix4d::Identity(), 0),
              ViewKind::current},
        target{0, rig_camera(make_rig(), "front_left"), EgoPose(Eigen::Matrix4d::Identity(), 0),
               ViewKind::current},
        anchors(make_lid_anchors(1.0, 60.0, 10)) {}
};

void BM_BuildField(benchmark::State& state) {
  const FieldSetup s;
  const int h = static_cast<int>(state.range(0));
  const int w = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_field(s.query, s.target, s.anchors, h, w));
  }
  state.SetItemsProcessed(state.iterations() * h * w * s.anchors.count());
}
BENCHMARK(BM_BuildField)->Args({28, 50})->Args({56, 100})->Args({112, 200});

void BM_BuildFieldSerialRef(benchmark::State& state) {
  const FieldSetup s;
  const int h = static_cast<int>(state.range(0));
  const int w = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ref::build_field(s.query, s.target, s.anchors, h, w));
  }
  state.SetItemsProcessed(state.iterations() * h * w * s.anchors.count());
}
BENCHMARK(BM_BuildFieldSerialRef)->Args({28, 50})->Args({56, 100})->Args({112, 200});

struct AggregateSetup {
  static constexpr int kChannels = 32;
  FieldSetup field_setup;
  CorrespondenceField field;
  FeatureMap query;
  FeatureMap target_map;
  DepthWeightHead head;

  AggregateSetup(int h, int w)
      : field(build_field(field_setup.query, field_setup.target, field_setup.anchors, h, w)),
        query(FeatureMap::random(kChannels, h, w, 1)),
        target_map(FeatureMap::random(kChannels, h, w, 2)),
        head(DepthWeightHead::seeded(kChannels, kChannels, 10, 3)) {}
};

void BM_Aggregate(benchmark::State& state) {
  const AggregateSetup s(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const AggregateTarget targets[3] = {{&s.target_map, &s.field},
                                      {&s.target_map, &s.field},
                                      {&s.target_map, &s.field}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(aggregate(s.query, targets, s.head));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_Aggregate)->Args({28, 50})->Args({56, 100});

void BM_AggregateSerialRef(benchmark::State& state) {
  const AggregateSetup s(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const AggregateTarget targets[3] = {{&s.target_map, &s.field},
                                      {&s.target_map, &s.field},
                                      {&s.target_map, &s.field}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(ref::aggregate(s.query, targets, s.head));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_AggregateSerialRef)->Args({28, 50})->Args({56, 100});

void BM_Render(benchmark::State& state) {
  const SyntheticScene scene = demo_scene();
  const auto rig = make_rig();
  const CameraModel& cam = rig_camera(rig, "front");
  const EgoPose pose(Eigen::Matrix4d::Identity(), 0);
  set_thread_cap(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(render(scene, cam, pose, 224, 400));
  }
  set_thread_cap(0);
  state.SetItemsProcessed(state.iterations() * 224 * 400);
}
BENCHMARK(BM_Render)->Arg(1)->Arg(2)->Arg(4);

}  // namespace
