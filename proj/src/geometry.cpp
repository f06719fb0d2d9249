#include "ecm/geometry.hpp"

#include <cmath>

namespace ecm {

Eigen::Matrix4d rigid_inverse(const Eigen::Matrix4d& m) {
  Eigen::Matrix4d inv = Eigen::Matrix4d::Identity();
  const Eigen::Matrix3d rt = m.topLeftCorner<3, 3>().transpose();
  inv.topLeftCorner<3, 3>() = rt;
  inv.topRightCorner<3, 1>() = -rt * m.topRightCorner<3, 1>();
  return inv;
}

void validate_rigid(const Eigen::Matrix4d& m, const char* what) {
  if (!m.allFinite()) throw InvalidPose(std::string(what) + ": non-finite entries");
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-9) throw InvalidPose(std::string(what) + ": rotation block not orthonormal");
  if (r.determinant() <= 0.0) throw InvalidPose(std::string(what) + ": improper rotation");
  const Eigen::RowVector4d last = m.row(3);
  if (std::abs(last(0)) > 1e-12 || std::abs(last(1)) > 1e-12 || std::abs(last(2)) > 1e-12 ||
      std::abs(last(3) - 1.0) > 1e-12) {
    throw InvalidPose(std::string(what) + ": last row must be (0,0,0,1)");
  }
}

CameraModel::CameraModel(const Eigen::Matrix3d& intrinsic, const Eigen::Matrix4d& extrinsic,
                         int width, int height, std::string view_id)
    : intrinsic_(intrinsic),
      extrinsic_(extrinsic),
      width_(width),
      height_(height),
      view_id_(std::move(view_id)) {
  if (width_ <= 0 || height_ <= 0) throw InvalidCamera("image size must be positive");
  if (!intrinsic_.allFinite()) throw InvalidCamera("intrinsic has non-finite entries");
  if (!(fx() > 0.0) || !(fy() > 0.0)) throw InvalidCamera("focal lengths must be positive");
  if (cx() < 0.0 || cx() >= width_ || cy() < 0.0 || cy() >= height_) {
    throw InvalidCamera("principal point outside the image");
  }
  try {
    validate_rigid(extrinsic_, "extrinsic");
  } catch (const InvalidPose& e) {
    throw InvalidCamera(e.what());
  }
}

Eigen::Matrix4d CameraModel::composed() const {
  Eigen::Matrix4d k = Eigen::Matrix4d::Identity();
  k.topLeftCorner<3, 3>() = intrinsic_;
  return k * extrinsic_;
}

CameraModel CameraModel::scaled_to(int grid_w, int grid_h) const {
  if (grid_w < 1 || grid_h < 1) throw InvalidCamera("grid dims must be >= 1");
  const double su = static_cast<double>(grid_w) / width_;
  const double sv = static_cast<double>(grid_h) / height_;
  Eigen::Matrix3d k = intrinsic_;
  k(0, 0) *= su;
  k(0, 2) *= su;
  k(1, 1) *= sv;
  k(1, 2) *= sv;
  return CameraModel(k, extrinsic_, grid_w, grid_h, view_id_);
}

CameraModel CameraModel::translated(const Eigen::Vector3d& delta_ego) const {
  Eigen::Matrix4d e = extrinsic_;
  e.topRightCorner<3, 1>() -= e.topLeftCorner<3, 3>() * delta_ego;
  return CameraModel(intrinsic_, e, width_, height_, view_id_);
}

bool CameraModel::operator==(const CameraModel& o) const {
  return width_ == o.width_ && height_ == o.height_ && intrinsic_ == o.intrinsic_ &&
         extrinsic_ == o.extrinsic_;
}

EgoPose::EgoPose(const Eigen::Matrix4d& m, int frame) : matrix(m), frame_index(frame) {
  validate_rigid(matrix, "ego pose");
}

DepthAnchors DepthAnchors::from_values(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("anchors: need at least one depth");
  if (!(values.front() > 0.0)) throw std::invalid_argument("anchors: depths must be positive");
  double prev_gap = 0.0;
  for (size_t i = 1; i < values.size(); ++i) {
    const double gap = values[i] - values[i - 1];
    if (!(gap > 0.0)) throw std::invalid_argument("anchors: depths must be strictly increasing");
    if (gap + 1e-12 < prev_gap) {
      throw std::invalid_argument("anchors: gaps must be non-decreasing");
    }
    prev_gap = gap;
  }
  DepthAnchors a;
  a.d_min = values.front();
  a.d_max = values.back();
  a.values = std::move(values);
  return a;
}

DepthAnchors make_lid_anchors(double d_min, double d_max, int count) {
  if (!(d_min > 0.0)) throw std::invalid_argument("lid anchors: d_min must be positive");
  if (count < 2) throw std::invalid_argument("lid anchors: need at least 2 anchors");
  // Reject degenerate (sub-millimeter) ranges; they collapse under rounding.
  if (!(d_max - d_min > 1e-3)) throw std::invalid_argument("lid anchors: degenerate depth range");
  DepthAnchors a;
  a.d_min = d_min;
  a.d_max = d_max;
  a.values.resize(count);
  const double span = d_max - d_min;
  const double denom = static_cast<double>(count) * (count + 1);
  for (int i = 1; i <= count; ++i) {
    a.values[i - 1] = d_min + span * (static_cast<double>(i) * (i + 1)) / denom;
  }
  return a;
}

Point3 back_project(const PixelCoord& p, const CameraModel& cam, double depth) {
  if (!(depth > 0.0)) throw std::invalid_argument("back_project: depth must be positive");
  const Eigen::Vector3d cam_pt((p.u - cam.cx()) / cam.fx() * depth,
                               (p.v - cam.cy()) / cam.fy() * depth, depth);
  const Eigen::Matrix4d inv = rigid_inverse(cam.extrinsic());
  const Eigen::Vector3d ego = inv.topLeftCorner<3, 3>() * cam_pt + inv.topRightCorner<3, 1>();
  return Point3::of(ego, Frame::ego);
}

Projection project(const Point3& ego_point, const CameraModel& cam) {
  const Eigen::Matrix4d& e = cam.extrinsic();
  const Eigen::Vector3d c =
      e.topLeftCorner<3, 3>() * ego_point.vec() + e.topRightCorner<3, 1>();
  Projection out;
  out.depth = c.z();
  if (c.z() != 0.0) {
    out.pixel.u = cam.fx() * c.x() / c.z() + cam.cx();
    out.pixel.v = cam.fy() * c.y() / c.z() + cam.cy();
  } else {
    out.pixel.u = cam.cx();
    out.pixel.v = cam.cy();
  }
  out.valid = c.z() > kDepthEps && out.pixel.u >= 0.0 && out.pixel.u < cam.width() &&
              out.pixel.v >= 0.0 && out.pixel.v < cam.height();
  return out;
}

Point3 transfer_point(const Point3& p, const EgoPose& pose_t, const EgoPose& pose_k) {
  if (pose_t.matrix == pose_k.matrix) return {p.x, p.y, p.z, Frame::ego};
  const Eigen::Vector3d g =
      pose_t.matrix.topLeftCorner<3, 3>() * p.vec() + pose_t.matrix.topRightCorner<3, 1>();
  const Eigen::Matrix4d inv = rigid_inverse(pose_k.matrix);
  const Eigen::Vector3d e = inv.topLeftCorner<3, 3>() * g + inv.topRightCorner<3, 1>();
  return Point3::of(e, Frame::ego);
}

}  // namespace ecm
