#include "ecm/condition_pipeline.hpp"

#include <algorithm>
#include <set>

#include "ecm/rng.hpp"

namespace ecm {

namespace {

// Seed streams for the pipeline parts.
enum : uint64_t {
  kProviderStream = 0,
  kBoxMlpStream = 1,
  kMapMlpStream = 2,
  kKeypointStream = 3,
  kAdapterStream = 4,
};

std::vector<std::string> scene_labels(const Scene& scene) {
  std::set<std::string> labels;
  for (const SceneFrame& f : scene.frames) {
    for (const Box3D& b : f.boxes) labels.insert(b.semantic_class);
    for (const MapElement& m : f.map_elements) labels.insert(m.semantic_class);
  }
  return {labels.begin(), labels.end()};
}

struct PipelineHeads {
  EmbeddingProvider provider;
  Mlp box_mlp;
  Mlp map_mlp;
  KeypointHead keypoint_head;

  PipelineHeads(const Scene& scene, const InjectConfig& config)
      : provider(scene_labels(scene), config.embed_dim, mix_seed(config.seed, kProviderStream)),
        box_mlp(Mlp::seeded({7, config.embed_dim, config.embed_dim},
                            mix_seed(config.seed, kBoxMlpStream))),
        map_mlp(Mlp::seeded({2 * config.n_map_points, config.embed_dim, config.embed_dim},
                            mix_seed(config.seed, kMapMlpStream))),
        keypoint_head(KeypointHead::seeded(config.embed_dim, config.n_fixed, config.n_learned,
                                           mix_seed(config.seed, kKeypointStream))) {}
};

}  // namespace

FeatureMap inject_frame_conditions(const Scene& scene, int frame_index,
                                   std::string_view view_id, const FeatureMap& latent,
                                   const InjectConfig& config) {
  const SceneFrame& frame = scene.frame(frame_index);
  const CameraModel& cam = scene.camera(frame_index, view_id);
  if (frame.boxes.empty() && frame.map_elements.empty()) return latent;

  const PipelineHeads heads(scene, config);
  const ChannelAdapter adapter =
      config.embed_dim == latent.channels
          ? ChannelAdapter{}
          : ChannelAdapter::seeded(config.embed_dim, latent.channels,
                                   mix_seed(config.seed, kAdapterStream));
  const ChannelAdapter* adapter_ptr = config.embed_dim == latent.channels ? nullptr : &adapter;

  FeatureMap out = latent;
  for (const Box3D& box : frame.boxes) {
    ConditionEmbedding e = encode_box(box, heads.provider, heads.box_mlp);
    e.frame_index = frame_index;
    e.keypoints =
        generate_keypoints(box, e, config.n_fixed, config.n_learned, heads.keypoint_head);
    out = scatter_inject(out, e, cam, adapter_ptr);
  }
  for (const MapElement& element : frame.map_elements) {
    ConditionEmbedding e = encode_map(element, heads.provider, heads.map_mlp);
    e.frame_index = frame_index;
    e.keypoints = map_keypoints(element, config.n_map_points);
    out = scatter_inject(out, e, cam, adapter_ptr);
  }
  return out;
}

std::optional<std::vector<float>> track_appearance(const Scene& scene,
                                                   const AppearanceSource& source,
                                                   int64_t track_id,
                                                   const InjectConfig& config) {
  if (source.features == nullptr) {
    throw std::invalid_argument("track_appearance: missing feature map");
  }
  const SceneFrame& frame = scene.frame(source.frame_index);
  const auto it = std::find_if(frame.boxes.begin(), frame.boxes.end(), [&](const Box3D& b) {
    return b.track_id.has_value() && *b.track_id == track_id;
  });
  if (it == frame.boxes.end()) return std::nullopt;

  const PipelineHeads heads(scene, config);
  ConditionEmbedding e = encode_box(*it, heads.provider, heads.box_mlp);
  const std::vector<Keypoint> kps =
      generate_keypoints(*it, e, config.n_fixed, config.n_learned, heads.keypoint_head);
  return aggregate_appearance(kps, *source.features,
                              scene.camera(source.frame_index, source.view_id));
}

ConditionEmbedding encode_box_identity_aware(const Scene& scene, int frame_index,
                                             const Box3D& box,
                                             std::span<const AppearanceSource> sources,
                                             const InjectConfig& config) {
  const PipelineHeads heads(scene, config);
  ConditionEmbedding e = encode_box(box, heads.provider, heads.box_mlp);
  e.frame_index = frame_index;
  e.keypoints =
      generate_keypoints(box, e, config.n_fixed, config.n_learned, heads.keypoint_head);
  if (!box.track_id.has_value()) return e;

  std::vector<std::vector<float>> appearances;
  for (const AppearanceSource& source : sources) {
    if (auto a = track_appearance(scene, source, *box.track_id, config)) {
      appearances.push_back(std::move(*a));
    }
  }
  return update_embedding_identity(std::move(e), appearances, box, config.n_fixed,
                                   config.n_learned, heads.keypoint_head);
}

}  // namespace ecm
