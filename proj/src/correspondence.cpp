#include "ecm/correspondence.hpp"

#include <algorithm>
#include <cstdlib>

#include "ecm/parallel.hpp"

namespace ecm {

CorrespondenceField build_field(const ViewRef& query, const ViewRef& target,
                                const DepthAnchors& anchors, int grid_h, int grid_w) {
  if (grid_h < 1 || grid_w < 1) throw std::invalid_argument("build_field: grid dims must be >= 1");
  const int depth_count = anchors.count();

  CorrespondenceField field{query, target, grid_h, grid_w, anchors, {}, {}};
  field.targets.resize(static_cast<size_t>(grid_h) * grid_w * depth_count);
  field.valid.assign(field.targets.size(), 0);

  // Same camera and pose: the composed chain is the analytic identity for
  // every anchor, so emit pixel centers exactly.
  if (query.camera == target.camera && query.pose.matrix == target.pose.matrix) {
    for (int h = 0; h < grid_h; ++h) {
      for (int w = 0; w < grid_w; ++w) {
        const PixelCoord center{w + 0.5, h + 0.5};
        for (int i = 0; i < depth_count; ++i) {
          const size_t at = field.index(h, w, i);
          field.targets[at] = center;
          field.valid[at] = 1;
        }
      }
    }
    return field;
  }

  const CameraModel qcam = query.camera.scaled_to(grid_w, grid_h);
  const CameraModel tcam = target.camera.scaled_to(grid_w, grid_h);

  // Rigid chain from query camera coordinates to target camera coordinates:
  // target_ext * E_k^-1 * E_t * query_ext^-1.
  Eigen::Matrix4d chain = rigid_inverse(qcam.extrinsic());
  if (query.pose.matrix != target.pose.matrix) {
    chain = rigid_inverse(target.pose.matrix) * query.pose.matrix * chain;
  }
  chain = tcam.extrinsic() * chain;
  const Eigen::Matrix3d rot = chain.topLeftCorner<3, 3>();
  const Eigen::Vector3d trans = chain.topRightCorner<3, 1>();

  const double inv_fx = 1.0 / qcam.fx();
  const double inv_fy = 1.0 / qcam.fy();
  const double* depths = anchors.values.data();

  const int workers = thread_count();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers)
#endif
  for (int h = 0; h < grid_h; ++h) {
    for (int w = 0; w < grid_w; ++w) {
      // Unit-depth ray of the query pixel center, rotated into the target
      // camera; anchored points are depth * ray_dir + trans.
      const Eigen::Vector3d ray((w + 0.5 - qcam.cx()) * inv_fx, (h + 0.5 - qcam.cy()) * inv_fy,
                                1.0);
      const Eigen::Vector3d dir = rot * ray;
      size_t at = field.index(h, w, 0);
      for (int i = 0; i < depth_count; ++i, ++at) {
        const Eigen::Vector3d pt = depths[i] * dir + trans;
        PixelCoord px{tcam.cx(), tcam.cy()};
        if (pt.z() != 0.0) {
          px.u = tcam.fx() * pt.x() / pt.z() + tcam.cx();
          px.v = tcam.fy() * pt.y() / pt.z() + tcam.cy();
        }
        field.targets[at] = px;
        field.valid[at] = pt.z() > kDepthEps && px.u >= 0.0 && px.u < grid_w && px.v >= 0.0 &&
                          px.v < grid_h;
      }
    }
  }
  (void)workers;
  return field;
}

OverlapScore overlap(const CorrespondenceField& field) {
  OverlapScore score;
  score.total = static_cast<int64_t>(field.valid.size());
  for (uint8_t v : field.valid) score.hits += v;
  score.fraction = score.total > 0 ? static_cast<double>(score.hits) / score.total : 0.0;
  return score;
}

std::vector<RankedView> match_target_views(const ViewRef& query,
                                           std::span<const ViewRef> candidates, int k,
                                           const DepthAnchors& anchors, int grid_h, int grid_w) {
  if (candidates.empty()) throw std::invalid_argument("match_target_views: no candidates");
  if (k < 1) throw std::invalid_argument("match_target_views: k must be >= 1");

  std::vector<RankedView> ranked;
  ranked.reserve(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    const CorrespondenceField field = build_field(query, candidates[i], anchors, grid_h, grid_w);
    ranked.push_back({candidates[i], overlap(field), i});
  }
  std::sort(ranked.begin(), ranked.end(), [&](const RankedView& a, const RankedView& b) {
    if (a.score.fraction != b.score.fraction) return a.score.fraction > b.score.fraction;
    const int gap_a = std::abs(a.view.frame_index - query.frame_index);
    const int gap_b = std::abs(b.view.frame_index - query.frame_index);
    if (gap_a != gap_b) return gap_a < gap_b;
    return a.candidate_index < b.candidate_index;
  });
  if (static_cast<size_t>(k) < ranked.size()) {
    ranked.erase(ranked.begin() + k, ranked.end());
  }
  return ranked;
}

}  // namespace ecm
