#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ecm/control.hpp"
#include "ecm/geometry.hpp"

#include <nlohmann/json_fwd.hpp>

namespace ecm {

struct SceneFrame {
  int index = 0;
  EgoPose ego_pose;
  std::vector<CameraModel> cameras;
  std::vector<Box3D> boxes;
  std::vector<MapElement> map_elements;
};

/// Scene description as read from disk: per frame the ego pose, the camera
/// rig, ego-frame boxes and map elements, plus scene-level metadata feeding
/// the text prompt template.
struct Scene {
  std::vector<SceneFrame> frames;
  std::string weather;
  std::string daytime;

  const SceneFrame& frame(int index) const;
  const CameraModel& camera(int frame_index, std::string_view view_id) const;
};

// Parses and validates a scene JSON document. Structural problems (missing
// fields, bad matrix shapes, non-contiguous frame indices, duplicate view
// ids) throw MalformedFile.
Scene load_scene(const std::filesystem::path& path);
Scene scene_from_json(const nlohmann::json& doc);
nlohmann::json scene_to_json(const Scene& scene);

// Built-in three-frame scene over the standard rig: the ego drives 2 m/frame
// along global +x past a few tracked boxes and simple map elements.
Scene synthetic_scene_description();

// Scene-level text prompt assembled from the metadata:
// "A driving scene image. {Weather}. {Daytime}." Recorded as metadata only;
// no text encoder is attached.
std::string prompt_text(const Scene& scene);

}  // namespace ecm
