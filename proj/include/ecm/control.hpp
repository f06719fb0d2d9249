#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecm/attention.hpp"
#include "ecm/geometry.hpp"
#include "ecm/mlp.hpp"

namespace ecm {

/// Oriented 3-D bounding box, ego frame: x/y/z center in meters, l along the
/// local x axis, w along local y, h along z, yaw about ego z in (-pi, pi].
struct Box3D {
  Point3 center;
  double length = 1.0;
  double width = 1.0;
  double height = 1.0;
  double yaw = 0.0;
  std::string semantic_class;
  std::optional<int64_t> track_id;
};

void validate_box(const Box3D& b);

enum class MapKind { polygon, linestring };

struct MapElement {
  std::vector<Eigen::Vector2d> vertices;  // ego frame, meters
  MapKind kind = MapKind::linestring;
  std::string semantic_class;
};

enum class ConditionSource { box, map };

struct Keypoint {
  Point3 position;
  double weight = 0.0;
};

/// Instance-level condition vector with the keypoints and weights used for
/// scatter injection. Keypoint weights are non-negative and sum to 1.
struct ConditionEmbedding {
  std::vector<float> vector;
  ConditionSource source = ConditionSource::box;
  std::vector<Keypoint> keypoints;
  std::optional<int64_t> track_id;
  int frame_index = -1;
};

/// Fixed per-label embedding table standing in for a pretrained text encoder;
/// the same label always maps to the same seeded vector.
class EmbeddingProvider {
 public:
  EmbeddingProvider(std::span<const std::string> labels, int dim, uint64_t seed);

  const std::vector<float>& at(const std::string& label) const;  // throws UnknownLabel
  bool contains(const std::string& label) const;
  int dim() const { return dim_; }

 private:
  int dim_;
  std::vector<std::pair<std::string, std::vector<float>>> table_;  // sorted by label
};

// E = MLP(x, y, z, l, w, h, yaw) + provider(class). The MLP input width must
// be 7 and its output width must equal the provider dimension.
ConditionEmbedding encode_box(const Box3D& box, const EmbeddingProvider& provider,
                              const Mlp& mlp);

// Resample a map element to n_points along its arc length (closing edge
// included for polygons; endpoints kept for linestrings).
std::vector<Eigen::Vector2d> resample_polyline(const MapElement& element, int n_points);

// E = MLP(flattened resampled vertices) + provider(class). The MLP input
// width fixes the resample count: n_points = in_dim / 2.
ConditionEmbedding encode_map(const MapElement& element, const EmbeddingProvider& provider,
                              const Mlp& mlp);

/// Linear readouts mapping a condition vector to learned keypoint offsets and
/// to the pre-softmax weight logits over all keypoints.
struct KeypointHead {
  Eigen::MatrixXd offset_readout;  // (3 * n_learned) x C_e
  Eigen::MatrixXd weight_readout;  // (n_fixed + n_learned) x C_e

  static KeypointHead seeded(int embed_dim, int n_fixed, int n_learned, uint64_t seed);
  static KeypointHead zeros(int embed_dim, int n_fixed, int n_learned);
};

// Fixed points come from the box geometry in order: center, the six face
// centers (+x, -x, +y, -y, +z, -z in the local frame), then the eight
// corners; n_fixed <= 15. Learned points are the center plus readout offsets
// scaled by the half extents, in the local frame. All points are rotated by
// yaw and translated to the center; weights are the softmax of the weight
// readout.
std::vector<Keypoint> generate_keypoints(const Box3D& box, const ConditionEmbedding& embedding,
                                         int n_fixed, int n_learned, const KeypointHead& head);

// sum_j w_j * bilinear(features, project(P_j)) with the camera rescaled to
// the feature grid. Keypoints that project invalidly contribute zero; weights
// are not renormalized.
std::vector<float> aggregate_appearance(std::span<const Keypoint> keypoints,
                                        const FeatureMap& features, const CameraModel& cam);

// Adds appearance vectors gathered for the same track into the embedding and
// regenerates its keypoints from the updated vector.
ConditionEmbedding update_embedding_identity(ConditionEmbedding embedding,
                                             std::span<const std::vector<float>> appearances,
                                             const Box3D& box, int n_fixed, int n_learned,
                                             const KeypointHead& head);

/// Fixed seeded linear map applied at injection when the embedding width
/// differs from the latent channel count.
struct ChannelAdapter {
  Eigen::MatrixXf weight;  // out_dim x in_dim

  static ChannelAdapter seeded(int in_dim, int out_dim, uint64_t seed);
  std::vector<float> apply(std::span<const float> v) const;
};

// Bilinear scatter of w_m * embedding vector onto the four pixels around each
// validly projecting keypoint (camera rescaled to the latent grid). Returns a
// new map; keypoints outside the image are dropped, taps outside the grid are
// clipped. Keypoints accumulate in index order.
FeatureMap scatter_inject(const FeatureMap& latent, const ConditionEmbedding& embedding,
                          const CameraModel& cam, const ChannelAdapter* adapter = nullptr);

// Keypoints for map-element injection: the resampled vertices at z = 0 with
// uniform weights.
std::vector<Keypoint> map_keypoints(const MapElement& element, int n_points);

}  // namespace ecm
