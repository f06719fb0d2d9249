#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ecm/correspondence.hpp"
#include "ecm/mlp.hpp"

namespace ecm {

/// Dense C x H x W feature grid (image latent or appearance feature source),
/// row-major with width fastest.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;
  int frame_index = -1;
  std::string view_id;

  FeatureMap() = default;
  FeatureMap(int c, int h, int w)
      : channels(c), height(h), width(w), data(static_cast<size_t>(c) * h * w, 0.0f) {
    if (c < 1 || h < 1 || w < 1) throw std::invalid_argument("feature map: dims must be >= 1");
  }

  size_t index(int c, int h, int w) const {
    return (static_cast<size_t>(c) * height + h) * width + w;
  }
  float at(int c, int h, int w) const { return data[index(c, h, w)]; }
  float& at(int c, int h, int w) { return data[index(c, h, w)]; }

  static FeatureMap random(int c, int h, int w, uint64_t seed, float lo = -1.0f, float hi = 1.0f);
};

/// Two-layer perceptron C -> hidden -> D predicting per-anchor logits from a
/// query pixel feature.
struct DepthWeightHead {
  Mlp mlp;

  static DepthWeightHead seeded(int channels, int hidden, int anchor_count, uint64_t seed) {
    return {Mlp::seeded({channels, hidden, anchor_count}, seed)};
  }
  static DepthWeightHead zeros(int channels, int hidden, int anchor_count) {
    return {Mlp::zeros({channels, hidden, anchor_count})};
  }

  int channels() const { return mlp.in_dim(); }
  int anchor_count() const { return mlp.out_dim(); }
};

// Softmax(MLP(f_q)): the depth distribution over anchors for one pixel.
std::vector<double> depth_weights(std::span<const float> query_feature,
                                  const DepthWeightHead& head);

// Bilinear read at a sub-pixel position; pixel (w, h) has its center at
// (w+0.5, h+0.5). Taps outside the map contribute zero.
std::vector<float> gather_bilinear(const FeatureMap& map, const PixelCoord& p);

enum class CombineMode { mean, sum };

struct AggregateTarget {
  const FeatureMap* features = nullptr;
  const CorrespondenceField* field = nullptr;
};

// Residual feature update along correspondence fields, per pixel:
//   w = Softmax(MLP(f_q)), entries at invalid anchors zeroed (no
//   renormalization); per view sum_i w_i * bilinear(target, p_i); views
//   combined by arithmetic mean (or sum); output = query + combined.
// A pixel with no valid anchor in any view is copied from the query
// bit-exactly. Parallel over rows; output independent of worker count.
FeatureMap aggregate(const FeatureMap& query, std::span<const AggregateTarget> targets,
                     const DepthWeightHead& head, CombineMode mode = CombineMode::mean);

}  // namespace ecm
