#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ecm/errors.hpp"

namespace ecm {

// Camera-frame depth below which a point counts as behind the camera [m].
inline constexpr double kDepthEps = 1e-6;

enum class Frame { ego, global, camera };

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  Frame frame = Frame::ego;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  static Point3 of(const Eigen::Vector3d& v, Frame f) { return {v.x(), v.y(), v.z(), f}; }
};

// Sub-pixel image position; u along width, v along height. The center of
// pixel (w, h) is at (w + 0.5, h + 0.5).
struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

// Inverse of a rigid 4x4 transform (orthonormal rotation block, last row
// 0 0 0 1), computed as [R^T | -R^T t].
Eigen::Matrix4d rigid_inverse(const Eigen::Matrix4d& m);

// Throws if the rotation block is not orthonormal within 1e-9, the
// determinant is not positive, or the last row is not (0,0,0,1).
void validate_rigid(const Eigen::Matrix4d& m, const char* what);

/// Pinhole camera. Conventions: camera frame is x-right, y-down, z-forward;
/// ego frame is x-forward, y-left, z-up. The extrinsic is the rigid transform
/// from ego coordinates to camera coordinates; the full rotation between the
/// two axis conventions lives inside it.
class CameraModel {
 public:
  CameraModel(const Eigen::Matrix3d& intrinsic, const Eigen::Matrix4d& extrinsic,
              int width, int height, std::string view_id);

  const Eigen::Matrix3d& intrinsic() const { return intrinsic_; }
  const Eigen::Matrix4d& extrinsic() const { return extrinsic_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const std::string& view_id() const { return view_id_; }

  double fx() const { return intrinsic_(0, 0); }
  double fy() const { return intrinsic_(1, 1); }
  double cx() const { return intrinsic_(0, 2); }
  double cy() const { return intrinsic_(1, 2); }

  /// pad(intrinsic) * extrinsic: maps ego-frame points to homogeneous image
  /// coordinates. The 3x3 intrinsic embeds into 4x4 with identity fourth
  /// row/column.
  Eigen::Matrix4d composed() const;

  /// Same camera with intrinsics rescaled so the image maps onto a
  /// grid_w x grid_h pixel grid (latent resolution).
  CameraModel scaled_to(int grid_w, int grid_h) const;

  /// Same orientation, optical center moved by delta (ego frame, meters).
  CameraModel translated(const Eigen::Vector3d& delta_ego) const;

  bool operator==(const CameraModel& o) const;

 private:
  Eigen::Matrix3d intrinsic_;
  Eigen::Matrix4d extrinsic_;
  int width_;
  int height_;
  std::string view_id_;
};

/// Rigid transform from ego coordinates to a global frame at one timestamp.
struct EgoPose {
  Eigen::Matrix4d matrix = Eigen::Matrix4d::Identity();
  int frame_index = 0;

  EgoPose() = default;
  EgoPose(const Eigen::Matrix4d& m, int frame);

  bool operator==(const EgoPose& o) const {
    return frame_index == o.frame_index && matrix == o.matrix;
  }
};

/// Ordered candidate depths used to lift a pixel into 3-D.
struct DepthAnchors {
  std::vector<double> values;  // strictly increasing, gaps non-decreasing
  double d_min = 0.0;
  double d_max = 0.0;

  int count() const { return static_cast<int>(values.size()); }

  static DepthAnchors from_values(std::vector<double> values);

  bool operator==(const DepthAnchors& o) const { return values == o.values; }
};

// Linear-increasing discretization: d_i = d_min + (d_max - d_min) *
// i*(i+1) / (D*(D+1)) for i = 1..D. The first bin starts just above d_min and
// the last anchor lands exactly on d_max; bin widths grow linearly.
DepthAnchors make_lid_anchors(double d_min, double d_max, int count);

struct Projection {
  PixelCoord pixel;  // reported even when invalid, for diagnostics
  double depth = 0.0;  // camera-frame z [m]
  bool valid = false;
};

// Lift a pixel to the camera-frame point at depth d, then into the ego frame.
Point3 back_project(const PixelCoord& p, const CameraModel& cam, double depth);

// Perspective projection of an ego-frame point. valid means the camera-frame
// depth exceeds kDepthEps and the pixel lies inside [0,width) x [0,height).
Projection project(const Point3& ego_point, const CameraModel& cam);

// Re-express an ego-frame point of frame t in the ego frame of frame k:
// result = E_k^-1 * E_t * P. Exact identity when the two pose matrices are
// bitwise equal.
Point3 transfer_point(const Point3& p, const EgoPose& pose_t, const EgoPose& pose_k);

}  // namespace ecm
