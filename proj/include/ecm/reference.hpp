#pragma once

#include <span>
#include <vector>

#include "ecm/attention.hpp"
#include "ecm/correspondence.hpp"

// Serial reference implementations written as plain scalar loops, kept
// deliberately independent of the main kernels (own matrix math, own
// interpolation, the literal image-resolution composition). Tests compare the
// production paths against these; the benchmark measures the gap.
namespace ecm::ref {

CorrespondenceField build_field(const ViewRef& query, const ViewRef& target,
                                const DepthAnchors& anchors, int grid_h, int grid_w);

double overlap_fraction(const CorrespondenceField& field);

struct RankEntry {
  size_t candidate_index = 0;
  double fraction = 0.0;
};

// Exhaustive overlap ranking (same ordering rule as the production matcher).
std::vector<RankEntry> rank_by_overlap(const ViewRef& query, std::span<const ViewRef> candidates,
                                       const DepthAnchors& anchors, int grid_h, int grid_w);

std::vector<float> gather_bilinear(const FeatureMap& map, const PixelCoord& p);

FeatureMap aggregate(const FeatureMap& query, std::span<const AggregateTarget> targets,
                     const DepthWeightHead& head, CombineMode mode = CombineMode::mean);

}  // namespace ecm::ref
