#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "ecm/attention.hpp"
#include "ecm/scene_io.hpp"

namespace ecm {

/// Configuration of the seeded condition-injection pipeline. All heads,
/// tables and the channel adapter derive deterministically from `seed`, so
/// identical (scene, frame, view, latent, config) inputs reproduce the same
/// output bit for bit.
struct InjectConfig {
  int embed_dim = 16;
  int n_fixed = 7;    // box center + face centers
  int n_learned = 6;  // readout-predicted offsets
  int n_map_points = 20;
  uint64_t seed = 0;
};

// Encodes every box and map element of the frame, attaches keypoints, and
// scatter-injects them into the latent through the named camera. An empty
// frame returns the latent unchanged.
FeatureMap inject_frame_conditions(const Scene& scene, int frame_index,
                                   std::string_view view_id, const FeatureMap& latent,
                                   const InjectConfig& config);

/// One historical/reference observation of a view: its features at latent
/// resolution plus where they came from.
struct AppearanceSource {
  int frame_index = 0;
  std::string view_id;
  const FeatureMap* features = nullptr;
};

// Appearance vector of the tracked box in one source frame: encodes the box
// the track has there, generates keypoints around it, and samples the
// features. Empty when the track does not appear in that frame (matching is
// by track_id only).
std::optional<std::vector<float>> track_appearance(const Scene& scene,
                                                   const AppearanceSource& source,
                                                   int64_t track_id, const InjectConfig& config);

// Identity-aware embedding of a box at the given frame: the geometric/class
// encoding plus the summed appearances of the same track over the sources.
ConditionEmbedding encode_box_identity_aware(const Scene& scene, int frame_index,
                                             const Box3D& box,
                                             std::span<const AppearanceSource> sources,
                                             const InjectConfig& config);

}  // namespace ecm
