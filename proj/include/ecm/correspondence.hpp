#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ecm/geometry.hpp"

namespace ecm {

enum class ViewKind { current, historical, reference };

/// One camera view at one timestamp.
struct ViewRef {
  int frame_index = 0;
  CameraModel camera;
  EgoPose pose;
  ViewKind kind = ViewKind::current;
};

/// Per query pixel, the D anchored projections into one target view, in
/// target latent coordinates, plus a validity mask. Entry (h, w, i) is the
/// projection of the query pixel center (w+0.5, h+0.5) lifted to anchor depth
/// i, carried through the ego/global pose chain into the target camera.
struct CorrespondenceField {
  ViewRef query_view;
  ViewRef target_view;
  int grid_h = 0;
  int grid_w = 0;
  DepthAnchors anchors;
  std::vector<PixelCoord> targets;  // grid_h * grid_w * D, anchor index fastest
  std::vector<uint8_t> valid;

  size_t index(int h, int w, int i) const {
    return (static_cast<size_t>(h) * grid_w + w) * anchors.values.size() + i;
  }
  const PixelCoord& target_at(int h, int w, int i) const { return targets[index(h, w, i)]; }
  bool valid_at(int h, int w, int i) const { return valid[index(h, w, i)] != 0; }
};

struct OverlapScore {
  double fraction = 0.0;  // hits / total
  int64_t hits = 0;
  int64_t total = 0;
};

// Build the pixel-correspondence field between a query and a target view at
// latent resolution (intrinsics are rescaled onto the grid). Deterministic
// and independent of the worker count; rows are processed in parallel.
// When the target shares the query's camera and pose the mapping is the
// analytic identity and pixel centers are emitted exactly.
CorrespondenceField build_field(const ViewRef& query, const ViewRef& target,
                                const DepthAnchors& anchors, int grid_h, int grid_w);

// Fraction of anchored projections that land in front of the target camera
// and inside its latent grid.
OverlapScore overlap(const CorrespondenceField& field);

struct RankedView {
  ViewRef view;
  OverlapScore score;
  size_t candidate_index = 0;
};

// Rank candidate target views by overlap with the query, descending. Ties
// break on smaller |frame gap|, then lower candidate index. Returns the top
// min(k, #candidates) entries.
std::vector<RankedView> match_target_views(const ViewRef& query,
                                           std::span<const ViewRef> candidates, int k,
                                           const DepthAnchors& anchors, int grid_h, int grid_w);

// Default number of target views: twice the frame count involved, i.e. 2 for
// cross-view attention and 2 * (n_reference + n_historical) for reference and
// temporal attention.
inline int default_target_view_count(ViewKind kind, int n_reference, int n_historical) {
  return kind == ViewKind::current ? 2 : 2 * (n_reference + n_historical);
}

}  // namespace ecm
