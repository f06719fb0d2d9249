#include "ecm/scene_io.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "ecm/scene_oracle.hpp"

namespace ecm {

namespace {

using nlohmann::json;

Eigen::Matrix4d mat4_from(const json& arr, const char* what) {
  if (!arr.is_array() || arr.size() != 16) {
    throw MalformedFile(std::string("scene: ") + what + " must be 16 numbers (row-major)");
  }
  Eigen::Matrix4d m;
  for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = arr[i].get<double>();
  return m;
}

Eigen::Matrix3d mat3_from(const json& arr, const char* what) {
  if (!arr.is_array() || arr.size() != 9) {
    throw MalformedFile(std::string("scene: ") + what + " must be 9 numbers (row-major)");
  }
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = arr[i].get<double>();
  return m;
}

template <typename T>
T require(const json& obj, const char* key) {
  if (!obj.contains(key)) throw MalformedFile(std::string("scene: missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw MalformedFile(std::string("scene: bad field '") + key + "': " + e.what());
  }
}

}  // namespace

const SceneFrame& Scene::frame(int index) const {
  if (index < 0 || index >= static_cast<int>(frames.size())) {
    throw std::invalid_argument("scene: frame " + std::to_string(index) + " out of range");
  }
  return frames[index];
}

const CameraModel& Scene::camera(int frame_index, std::string_view view_id) const {
  for (const CameraModel& cam : frame(frame_index).cameras) {
    if (cam.view_id() == view_id) return cam;
  }
  throw std::invalid_argument("scene: unknown view id '" + std::string(view_id) + "' at frame " +
                              std::to_string(frame_index));
}

Scene scene_from_json(const json& doc) {
  Scene scene;
  try {
    if (doc.contains("metadata")) {
      scene.weather = doc["metadata"].value("weather", "");
      scene.daytime = doc["metadata"].value("daytime", "");
    }
    if (!doc.contains("frames") || !doc["frames"].is_array() || doc["frames"].empty()) {
      throw MalformedFile("scene: needs a non-empty 'frames' array");
    }
    for (const json& jf : doc["frames"]) {
      SceneFrame frame;
      frame.index = require<int>(jf, "index");
      if (frame.index != static_cast<int>(scene.frames.size())) {
        throw MalformedFile("scene: frame indices must be contiguous from 0");
      }
      frame.ego_pose = EgoPose(mat4_from(jf.at("ego_pose"), "ego_pose"), frame.index);

      for (const json& jc : jf.value("cameras", json::array())) {
        const std::string id = require<std::string>(jc, "view_id");
        for (const CameraModel& existing : frame.cameras) {
          if (existing.view_id() == id) {
            throw MalformedFile("scene: duplicate view id '" + id + "'");
          }
        }
        frame.cameras.emplace_back(mat3_from(jc.at("intrinsic"), "intrinsic"),
                                   mat4_from(jc.at("extrinsic"), "extrinsic"),
                                   require<int>(jc, "width"), require<int>(jc, "height"), id);
      }

      for (const json& jb : jf.value("boxes", json::array())) {
        const auto center = require<std::vector<double>>(jb, "center");
        const auto size = require<std::vector<double>>(jb, "size");
        if (center.size() != 3 || size.size() != 3) {
          throw MalformedFile("scene: box center/size must have 3 entries");
        }
        Box3D box;
        box.center = {center[0], center[1], center[2], Frame::ego};
        box.length = size[0];
        box.width = size[1];
        box.height = size[2];
        box.yaw = require<double>(jb, "yaw");
        box.semantic_class = require<std::string>(jb, "class");
        if (jb.contains("track_id")) box.track_id = jb["track_id"].get<int64_t>();
        validate_box(box);
        frame.boxes.push_back(std::move(box));
      }

      for (const json& jm : jf.value("map_elements", json::array())) {
        MapElement el;
        const std::string kind = require<std::string>(jm, "kind");
        if (kind == "polygon") {
          el.kind = MapKind::polygon;
        } else if (kind == "linestring") {
          el.kind = MapKind::linestring;
        } else {
          throw MalformedFile("scene: map kind must be polygon or linestring");
        }
        el.semantic_class = require<std::string>(jm, "class");
        for (const json& jv : jm.at("vertices")) {
          if (!jv.is_array() || jv.size() != 2) {
            throw MalformedFile("scene: map vertices must be [x, y] pairs");
          }
          el.vertices.emplace_back(jv[0].get<double>(), jv[1].get<double>());
        }
        if (el.vertices.size() < 2 ||
            (el.kind == MapKind::polygon && el.vertices.size() < 3)) {
          throw MalformedFile("scene: map element has too few vertices");
        }
        frame.map_elements.push_back(std::move(el));
      }
      scene.frames.push_back(std::move(frame));
    }
  } catch (const json::exception& e) {
    throw MalformedFile(std::string("scene: malformed JSON structure: ") + e.what());
  } catch (const InvalidCamera& e) {
    throw MalformedFile(std::string("scene: bad camera: ") + e.what());
  } catch (const InvalidPose& e) {
    throw MalformedFile(std::string("scene: bad pose: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw MalformedFile(std::string("scene: invalid value: ") + e.what());
  }
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open scene file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw MalformedFile(std::string("scene: JSON parse error: ") + e.what());
  }
  return scene_from_json(doc);
}

json scene_to_json(const Scene& scene) {
  json doc;
  doc["metadata"] = {{"weather", scene.weather}, {"daytime", scene.daytime}};
  doc["frames"] = json::array();
  for (const SceneFrame& frame : scene.frames) {
    json jf;
    jf["index"] = frame.index;
    jf["ego_pose"] = json::array();
    for (int i = 0; i < 16; ++i) jf["ego_pose"].push_back(frame.ego_pose.matrix(i / 4, i % 4));
    jf["cameras"] = json::array();
    for (const CameraModel& cam : frame.cameras) {
      json jc;
      jc["view_id"] = cam.view_id();
      jc["width"] = cam.width();
      jc["height"] = cam.height();
      jc["intrinsic"] = json::array();
      for (int i = 0; i < 9; ++i) jc["intrinsic"].push_back(cam.intrinsic()(i / 3, i % 3));
      jc["extrinsic"] = json::array();
      for (int i = 0; i < 16; ++i) jc["extrinsic"].push_back(cam.extrinsic()(i / 4, i % 4));
      jf["cameras"].push_back(std::move(jc));
    }
    jf["boxes"] = json::array();
    for (const Box3D& box : frame.boxes) {
      json jb;
      jb["center"] = {box.center.x, box.center.y, box.center.z};
      jb["size"] = {box.length, box.width, box.height};
      jb["yaw"] = box.yaw;
      jb["class"] = box.semantic_class;
      if (box.track_id) jb["track_id"] = *box.track_id;
      jf["boxes"].push_back(std::move(jb));
    }
    jf["map_elements"] = json::array();
    for (const MapElement& el : frame.map_elements) {
      json jm;
      jm["kind"] = el.kind == MapKind::polygon ? "polygon" : "linestring";
      jm["class"] = el.semantic_class;
      jm["vertices"] = json::array();
      for (const Eigen::Vector2d& v : el.vertices) jm["vertices"].push_back({v.x(), v.y()});
      jf["map_elements"].push_back(std::move(jm));
    }
    doc["frames"].push_back(std::move(jf));
  }
  return doc;
}

std::string prompt_text(const Scene& scene) {
  std::string prompt = "A driving scene image.";
  if (!scene.weather.empty()) prompt += " " + scene.weather + ".";
  if (!scene.daytime.empty()) prompt += " " + scene.daytime + ".";
  return prompt;
}

Scene synthetic_scene_description() {
  Scene scene;
  scene.weather = "Sunny";
  scene.daytime = "Daytime";
  const std::vector<CameraModel> rig = make_rig();
  const SyntheticScene world = demo_scene();

  for (int t = 0; t < 3; ++t) {
    SceneFrame frame;
    frame.index = t;
    Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();
    pose(0, 3) = 2.0 * t;
    frame.ego_pose = EgoPose(pose, t);
    frame.cameras = rig;

    // The demo boxes are static in the global frame; re-express per frame.
    for (const SceneBox& sb : world.boxes) {
      Box3D box = sb.geometry;
      box.center.x -= 2.0 * t;
      box.center.frame = Frame::ego;
      frame.boxes.push_back(std::move(box));
    }

    MapElement left_divider;
    left_divider.kind = MapKind::linestring;
    left_divider.semantic_class = "divider";
    left_divider.vertices = {{-10.0 - 2.0 * t, 1.75}, {40.0 - 2.0 * t, 1.75}};
    frame.map_elements.push_back(std::move(left_divider));

    MapElement right_divider;
    right_divider.kind = MapKind::linestring;
    right_divider.semantic_class = "divider";
    right_divider.vertices = {{-10.0 - 2.0 * t, -1.75}, {40.0 - 2.0 * t, -1.75}};
    frame.map_elements.push_back(std::move(right_divider));

    MapElement crossing;
    crossing.kind = MapKind::polygon;
    crossing.semantic_class = "crosswalk";
    const double cx = 20.0 - 2.0 * t;
    crossing.vertices = {{cx - 2.0, -4.0}, {cx + 2.0, -4.0}, {cx + 2.0, 4.0}, {cx - 2.0, 4.0}};
    frame.map_elements.push_back(std::move(crossing));

    scene.frames.push_back(std::move(frame));
  }
  return scene;
}

}  // namespace ecm
