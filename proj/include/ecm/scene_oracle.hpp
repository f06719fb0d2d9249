#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "ecm/attention.hpp"
#include "ecm/control.hpp"
#include "ecm/correspondence.hpp"
#include "ecm/geometry.hpp"

namespace ecm {

/// Analytic test world, global frame: an infinite z=0 ground plane carrying a
/// two-color checker, a set of yawed boxes with flat albedo, and a sky color.
struct SceneBox {
  Box3D geometry;  // center/size/yaw interpreted in the global frame
  std::array<float, 3> albedo{0.8f, 0.2f, 0.2f};
};

struct SyntheticScene {
  double checker_cell = 2.0;  // meters
  std::array<float, 3> checker_color_a{0.50f, 0.50f, 0.50f};
  std::array<float, 3> checker_color_b{0.56f, 0.56f, 0.56f};
  std::array<float, 3> sky_color{0.30f, 0.45f, 0.70f};
  std::vector<SceneBox> boxes;
};

struct RenderedView {
  FeatureMap rgb;             // 3 x H x W
  std::vector<double> depth;  // H*W camera-frame z of the first hit, +inf for sky
  int frame_index = 0;
  std::string view_id;

  double depth_at(int h, int w) const { return depth[static_cast<size_t>(h) * rgb.width + w]; }
};

// The verification world: checker ground plus a far fronto-parallel wall that
// keeps every visible surface inside the depth-anchor range.
SyntheticScene checker_scene();
// Checker world plus a few boxes, for renders and box tests.
SyntheticScene demo_scene();

// Six-camera rig: yaws 0, +55, -55, +110, -110, 180 degrees with view ids
// front, front_left, front_right, back_left, back_right, back; 70 degree
// horizontal FOV (110 for the rear camera), 400x224 images, optical centers
// at ego (0, 0, 1.5).
std::vector<CameraModel> make_rig();
const CameraModel& rig_camera(std::span<const CameraModel> rig, std::string_view view_id);

// Ray-cast the scene at grid resolution: per pixel the nearest analytic
// intersection among the ground plane and the boxes, no antialiasing.
// Deterministic; rows render in parallel.
RenderedView render(const SyntheticScene& scene, const CameraModel& cam, const EgoPose& pose,
                    int grid_h, int grid_w);

struct VerifyReport {
  double match_rate = 0.0;                 // per-channel |delta| < color_tol
  double mean_reprojection_error_px = 0.0; // anchor hit vs true-depth transfer
  double coverage = 0.0;                   // compared / finite-depth pixels
  int64_t finite_pixels = 0;
  int64_t compared = 0;
  int64_t matched = 0;
};

// Ground-truth check of a correspondence field: for every query pixel with
// finite depth, take the anchor nearest the true depth; where that anchor
// projects validly, compare the query color against a bilinear read of the
// target render and measure the pixel distance to the analytically
// transferred true-depth point.
VerifyReport verify_correspondence(const RenderedView& query, const RenderedView& target,
                                   const CorrespondenceField& field, double color_tol = 0.05);

}  // namespace ecm
