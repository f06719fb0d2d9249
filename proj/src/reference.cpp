#include "ecm/reference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace ecm::ref {

namespace {

using Mat4 = std::array<std::array<double, 4>, 4>;
using Vec4 = std::array<double, 4>;

Mat4 from_eigen(const Eigen::Matrix4d& m) {
  Mat4 out;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out[r][c] = m(r, c);
  }
  return out;
}

Vec4 apply(const Mat4& m, const Vec4& v) {
  Vec4 out{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) out[r] += m[r][c] * v[c];
  }
  return out;
}

// General 4x4 inverse by Gauss-Jordan elimination with partial pivoting.
Mat4 invert(const Mat4& in) {
  Mat4 a = in;
  Mat4 inv{};
  for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0) throw std::invalid_argument("reference: singular matrix");
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double scale = 1.0 / a[col][col];
    for (int c = 0; c < 4; ++c) {
      a[col][c] *= scale;
      inv[col][c] *= scale;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (int c = 0; c < 4; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

}  // namespace

CorrespondenceField build_field(const ViewRef& query, const ViewRef& target,
                                const DepthAnchors& anchors, int grid_h, int grid_w) {
  if (grid_h < 1 || grid_w < 1) throw std::invalid_argument("ref build_field: bad grid");
  const int depth_count = anchors.count();

  CorrespondenceField field{query, target, grid_h, grid_w, anchors, {}, {}};
  field.targets.resize(static_cast<size_t>(grid_h) * grid_w * depth_count);
  field.valid.assign(field.targets.size(), 0);

  const Mat4 q_ext_inv = invert(from_eigen(query.camera.extrinsic()));
  const Mat4 pose_t = from_eigen(query.pose.matrix);
  const Mat4 pose_k_inv = invert(from_eigen(target.pose.matrix));
  const Mat4 t_ext = from_eigen(target.camera.extrinsic());

  const double q_fx = query.camera.fx(), q_fy = query.camera.fy();
  const double q_cx = query.camera.cx(), q_cy = query.camera.cy();
  const double t_fx = target.camera.fx(), t_fy = target.camera.fy();
  const double t_cx = target.camera.cx(), t_cy = target.camera.cy();
  const double q_su = static_cast<double>(query.camera.width()) / grid_w;
  const double q_sv = static_cast<double>(query.camera.height()) / grid_h;
  const double t_su = static_cast<double>(grid_w) / target.camera.width();
  const double t_sv = static_cast<double>(grid_h) / target.camera.height();

  for (int h = 0; h < grid_h; ++h) {
    for (int w = 0; w < grid_w; ++w) {
      const double u_img = (w + 0.5) * q_su;
      const double v_img = (h + 0.5) * q_sv;
      for (int i = 0; i < depth_count; ++i) {
        const double d = anchors.values[i];
        const Vec4 cam_q{(u_img - q_cx) / q_fx * d, (v_img - q_cy) / q_fy * d, d, 1.0};
        const Vec4 ego_q = apply(q_ext_inv, cam_q);
        const Vec4 global = apply(pose_t, ego_q);
        const Vec4 ego_k = apply(pose_k_inv, global);
        const Vec4 cam_t = apply(t_ext, ego_k);

        PixelCoord px{t_cx * t_su, t_cy * t_sv};
        if (cam_t[2] != 0.0) {
          px.u = (t_fx * cam_t[0] / cam_t[2] + t_cx) * t_su;
          px.v = (t_fy * cam_t[1] / cam_t[2] + t_cy) * t_sv;
        }
        const size_t at = field.index(h, w, i);
        field.targets[at] = px;
        field.valid[at] = cam_t[2] > 1e-6 && px.u >= 0.0 && px.u < grid_w && px.v >= 0.0 &&
                          px.v < grid_h;
      }
    }
  }
  return field;
}

double overlap_fraction(const CorrespondenceField& field) {
  if (field.valid.empty()) return 0.0;
  int64_t hits = 0;
  for (uint8_t v : field.valid) hits += v;
  return static_cast<double>(hits) / static_cast<double>(field.valid.size());
}

std::vector<RankEntry> rank_by_overlap(const ViewRef& query, std::span<const ViewRef> candidates,
                                       const DepthAnchors& anchors, int grid_h, int grid_w) {
  std::vector<RankEntry> entries;
  entries.reserve(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    entries.push_back(
        RankEntry{i, overlap_fraction(ref::build_field(query, candidates[i], anchors, grid_h, grid_w))});
  }
  std::sort(entries.begin(), entries.end(), [&](const RankEntry& a, const RankEntry& b) {
    if (a.fraction != b.fraction) return a.fraction > b.fraction;
    const int gap_a = std::abs(candidates[a.candidate_index].frame_index - query.frame_index);
    const int gap_b = std::abs(candidates[b.candidate_index].frame_index - query.frame_index);
    if (gap_a != gap_b) return gap_a < gap_b;
    return a.candidate_index < b.candidate_index;
  });
  return entries;
}

std::vector<float> gather_bilinear(const FeatureMap& map, const PixelCoord& p) {
  std::vector<float> out(map.channels, 0.0f);
  const double x = p.u - 0.5;
  const double y = p.v - 0.5;
  const double xf = std::floor(x);
  const double yf = std::floor(y);
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      const int xi = static_cast<int>(xf) + dx;
      const int yi = static_cast<int>(yf) + dy;
      if (xi < 0 || xi >= map.width || yi < 0 || yi >= map.height) continue;
      const double wx = dx == 0 ? 1.0 - (x - xf) : x - xf;
      const double wy = dy == 0 ? 1.0 - (y - yf) : y - yf;
      for (int c = 0; c < map.channels; ++c) {
        out[c] = static_cast<float>(out[c] + wx * wy * map.at(c, yi, xi));
      }
    }
  }
  return out;
}

FeatureMap aggregate(const FeatureMap& query, std::span<const AggregateTarget> targets,
                     const DepthWeightHead& head, CombineMode mode) {
  FeatureMap out = query;
  const int depth_count = head.anchor_count();
  const Mlp& mlp = head.mlp;

  for (int h = 0; h < query.height; ++h) {
    for (int w = 0; w < query.width; ++w) {
      // Forward pass, written out longhand.
      std::vector<double> act(query.channels);
      for (int c = 0; c < query.channels; ++c) act[c] = query.at(c, h, w);
      for (int layer = 0; layer < mlp.layer_count(); ++layer) {
        const Eigen::MatrixXd& wm = mlp.weight(layer);
        std::vector<double> next(wm.rows());
        for (Eigen::Index r = 0; r < wm.rows(); ++r) {
          double s = mlp.bias(layer)(r);
          for (Eigen::Index c = 0; c < wm.cols(); ++c) s += wm(r, c) * act[c];
          next[r] = layer + 1 < mlp.layer_count() ? std::tanh(s) : s;
        }
        act = std::move(next);
      }
      double mx = act[0];
      for (double v : act) mx = std::max(mx, v);
      double norm = 0.0;
      std::vector<double> weights(depth_count);
      for (int i = 0; i < depth_count; ++i) {
        weights[i] = std::exp(act[i] - mx);
        norm += weights[i];
      }
      for (double& v : weights) v /= norm;

      bool any_valid = false;
      std::vector<double> acc(query.channels, 0.0);
      for (const AggregateTarget& t : targets) {
        for (int i = 0; i < depth_count; ++i) {
          if (!t.field->valid_at(h, w, i)) continue;
          any_valid = true;
          const std::vector<float> f = ref::gather_bilinear(*t.features, t.field->target_at(h, w, i));
          for (int c = 0; c < query.channels; ++c) acc[c] += weights[i] * f[c];
        }
      }
      if (!any_valid) continue;
      const double scale =
          mode == CombineMode::mean && !targets.empty() ? 1.0 / static_cast<double>(targets.size())
                                                        : 1.0;
      for (int c = 0; c < query.channels; ++c) {
        out.at(c, h, w) = static_cast<float>(static_cast<double>(query.at(c, h, w)) +
                                             scale * acc[c]);
      }
    }
  }
  return out;
}

}  // namespace ecm::ref
