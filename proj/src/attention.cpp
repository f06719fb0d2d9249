#include "ecm/attention.hpp"

#include <cmath>

#include "ecm/parallel.hpp"
#include "ecm/rng.hpp"

namespace ecm {

namespace {

// Accumulates weight * map(:, p) into acc (length C). Returns false when all
// four taps fall outside the map.
bool gather_accumulate(const FeatureMap& map, const PixelCoord& p, double weight, double* acc) {
  const double x = p.u - 0.5;
  const double y = p.v - 0.5;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const double tap_w[4] = {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy};
  const int tx[4] = {x0, x0 + 1, x0, x0 + 1};
  const int ty[4] = {y0, y0, y0 + 1, y0 + 1};
  bool any = false;
  for (int t = 0; t < 4; ++t) {
    if (tx[t] < 0 || tx[t] >= map.width || ty[t] < 0 || ty[t] >= map.height) continue;
    any = true;
    const double w = weight * tap_w[t];
    const size_t base = static_cast<size_t>(ty[t]) * map.width + tx[t];
    const size_t stride = static_cast<size_t>(map.height) * map.width;
    for (int c = 0; c < map.channels; ++c) {
      acc[c] += w * map.data[base + c * stride];
    }
  }
  return any;
}

}  // namespace

FeatureMap FeatureMap::random(int c, int h, int w, uint64_t seed, float lo, float hi) {
  FeatureMap m(c, h, w);
  std::mt19937_64 eng(splitmix64(seed));
  for (float& v : m.data) v = static_cast<float>(uniform(eng, lo, hi));
  return m;
}

std::vector<double> depth_weights(std::span<const float> query_feature,
                                  const DepthWeightHead& head) {
  if (static_cast<int>(query_feature.size()) != head.channels()) {
    throw std::invalid_argument("depth_weights: feature dimension mismatch");
  }
  std::vector<double> in(query_feature.begin(), query_feature.end());
  return softmax(head.mlp.forward(in));
}

std::vector<float> gather_bilinear(const FeatureMap& map, const PixelCoord& p) {
  std::vector<double> acc(map.channels, 0.0);
  gather_accumulate(map, p, 1.0, acc.data());
  std::vector<float> out(map.channels);
  for (int c = 0; c < map.channels; ++c) out[c] = static_cast<float>(acc[c]);
  return out;
}

FeatureMap aggregate(const FeatureMap& query, std::span<const AggregateTarget> targets,
                     const DepthWeightHead& head, CombineMode mode) {
  if (head.channels() != query.channels) {
    throw std::invalid_argument("aggregate: head channel width mismatch");
  }
  const int depth_count = head.anchor_count();
  for (const AggregateTarget& t : targets) {
    if (t.field->grid_h != query.height || t.field->grid_w != query.width) {
      throw std::invalid_argument("aggregate: field grid does not match query map");
    }
    if (!(t.field->anchors == targets.front().field->anchors)) {
      throw std::invalid_argument("aggregate: fields disagree on anchors");
    }
    if (t.field->anchors.count() != depth_count) {
      throw std::invalid_argument("aggregate: anchor count does not match head");
    }
    if (t.features->channels != query.channels) {
      throw std::invalid_argument("aggregate: target channel width mismatch");
    }
  }

  FeatureMap out = query;
  const int grid_h = query.height;
  const int grid_w = query.width;
  const int channels = query.channels;
  const size_t plane = static_cast<size_t>(grid_h) * grid_w;
  const double view_scale =
      (mode == CombineMode::mean && !targets.empty()) ? 1.0 / static_cast<double>(targets.size())
                                                      : 1.0;

  const int workers = thread_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers)
#endif
  for (int h = 0; h < grid_h; ++h) {
    std::vector<float> fq(channels);
    std::vector<double> fq_d(channels);
    std::vector<double> acc(channels);
    for (int w = 0; w < grid_w; ++w) {
      const size_t px = static_cast<size_t>(h) * grid_w + w;
      for (int c = 0; c < channels; ++c) {
        fq[c] = query.data[px + c * plane];
        fq_d[c] = fq[c];
      }
      const std::vector<double> weights = softmax(head.mlp.forward(fq_d));

      std::fill(acc.begin(), acc.end(), 0.0);
      bool any_valid = false;
      for (const AggregateTarget& t : targets) {
        for (int i = 0; i < depth_count; ++i) {
          if (!t.field->valid_at(h, w, i)) continue;
          any_valid = true;
          gather_accumulate(*t.features, t.field->target_at(h, w, i), weights[i] * view_scale,
                            acc.data());
        }
      }
      if (!any_valid) continue;  // keep the query value bit-exactly
      for (int c = 0; c < channels; ++c) {
        out.data[px + c * plane] = static_cast<float>(fq_d[c] + acc[c]);
      }
    }
  }
  (void)workers;
  return out;
}

}  // namespace ecm
