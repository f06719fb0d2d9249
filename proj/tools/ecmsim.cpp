// Command-line harness: scene ingestion plus overlap / verification /
// sampling / injection experiments over the ECM kernels.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ecm/condition_pipeline.hpp"
#include "ecm/correspondence.hpp"
#include "ecm/sampling.hpp"
#include "ecm/scene_io.hpp"
#include "ecm/scene_oracle.hpp"
#include "ecm/tensor_io.hpp"

namespace {

using nlohmann::json;

struct GridSpec {
  int h = 28;
  int w = 50;
};

GridSpec parse_grid(const std::string& s) {
  GridSpec g;
  if (std::sscanf(s.c_str(), "%dx%d", &g.h, &g.w) != 2 || g.h < 1 || g.w < 1) {
    throw std::invalid_argument("bad --grid, expected HxW like 28x50");
  }
  return g;
}

ecm::DepthAnchors parse_anchors(const std::string& s) {
  double lo = 0.0, hi = 0.0;
  int n = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3) {
    throw std::invalid_argument("bad --anchors, expected DMIN:DMAX:D like 1:60:10");
  }
  return ecm::make_lid_anchors(lo, hi, n);
}

ecm::Scene load_scene_arg(const std::string& arg) {
  if (arg == "synthetic") return ecm::synthetic_scene_description();
  return ecm::load_scene(arg);
}

ecm::ViewRef make_view(const ecm::Scene& scene, int frame, const std::string& view_id,
                       ecm::ViewKind kind) {
  return {frame, scene.camera(frame, view_id), scene.frame(frame).ego_pose, kind};
}

// Candidate token: "view_id" or "view_id@frame".
std::pair<std::string, int> parse_view_token(const std::string& token, int default_frame) {
  const size_t at = token.find('@');
  if (at == std::string::npos) return {token, default_frame};
  return {token.substr(0, at), std::stoi(token.substr(at + 1))};
}

std::string format_fraction(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9f", v);
  return buf;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    ecm::write_text_atomic(out_path, text);
  }
}

json report_for_pair(const std::string& name, const ecm::VerifyReport& r) {
  return json{{"pair", name},
              {"match_rate", r.match_rate},
              {"mean_reprojection_error_px", r.mean_reprojection_error_px},
              {"coverage", r.coverage},
              {"finite_pixels", r.finite_pixels},
              {"compared", r.compared},
              {"matched", r.matched}};
}

int cmd_overlap(const std::string& scene_arg, int frame, const std::string& query_id,
                std::vector<std::string> candidate_tokens, int k, const GridSpec& grid,
                const ecm::DepthAnchors& anchors, const std::string& out_path) {
  const ecm::Scene scene = load_scene_arg(scene_arg);
  const ecm::ViewRef query = make_view(scene, frame, query_id, ecm::ViewKind::current);

  if (candidate_tokens.empty()) {
    for (const ecm::CameraModel& cam : scene.frame(frame).cameras) {
      if (cam.view_id() != query_id) candidate_tokens.push_back(cam.view_id());
    }
  }
  std::vector<ecm::ViewRef> candidates;
  for (const std::string& token : candidate_tokens) {
    const auto [id, cand_frame] = parse_view_token(token, frame);
    const ecm::ViewKind kind =
        cand_frame == frame ? ecm::ViewKind::current : ecm::ViewKind::historical;
    candidates.push_back(make_view(scene, cand_frame, id, kind));
  }

  const std::vector<ecm::RankedView> ranked =
      ecm::match_target_views(query, candidates, k, anchors, grid.h, grid.w);

  std::string csv = "target_view,frame,fraction,hits,total\n";
  for (const ecm::RankedView& rv : ranked) {
    csv += rv.view.camera.view_id();
    csv += ',';
    csv += std::to_string(rv.view.frame_index);
    csv += ',';
    csv += format_fraction(rv.score.fraction);
    csv += ',';
    csv += std::to_string(rv.score.hits);
    csv += ',';
    csv += std::to_string(rv.score.total);
    csv += '\n';
  }
  emit(out_path, csv);
  return 0;
}

int cmd_verify(const std::string& scene_arg, int frame, std::vector<std::string> pair_tokens,
               double baseline, const GridSpec& grid, const ecm::DepthAnchors& anchors,
               const std::string& out_path) {
  const ecm::SyntheticScene world = ecm::checker_scene();
  json pairs = json::array();

  auto run_pair = [&](const std::string& name, const ecm::ViewRef& query,
                      const ecm::ViewRef& target) {
    const ecm::RenderedView qv = ecm::render(world, query.camera, query.pose, grid.h, grid.w);
    const ecm::RenderedView tv = ecm::render(world, target.camera, target.pose, grid.h, grid.w);
    const ecm::CorrespondenceField field =
        ecm::build_field(query, target, anchors, grid.h, grid.w);
    pairs.push_back(report_for_pair(name, ecm::verify_correspondence(qv, tv, field)));
  };

  if (scene_arg == "synthetic") {
    if (pair_tokens.empty()) pair_tokens = {"identity", "translate", "opposite"};
    const std::vector<ecm::CameraModel> rig = ecm::make_rig();
    const ecm::EgoPose pose(Eigen::Matrix4d::Identity(), 0);
    const ecm::ViewRef front{0, ecm::rig_camera(rig, "front"), pose, ecm::ViewKind::current};
    for (const std::string& token : pair_tokens) {
      if (token == "identity") {
        run_pair(token, front, front);
      } else if (token == "translate") {
        // Duplicate front camera shifted laterally (ego +y) by the baseline.
        const ecm::ViewRef shifted{
            0, front.camera.translated(Eigen::Vector3d(0.0, baseline, 0.0)), pose,
            ecm::ViewKind::reference};
        run_pair(token, front, shifted);
      } else if (token == "opposite") {
        const ecm::ViewRef back{0, ecm::rig_camera(rig, "back"), pose, ecm::ViewKind::current};
        run_pair(token, front, back);
      } else {
        throw std::invalid_argument("synthetic pairs are identity|translate|opposite, got '" +
                                    token + "'");
      }
    }
  } else {
    const ecm::Scene scene = load_scene_arg(scene_arg);
    if (pair_tokens.empty()) throw std::invalid_argument("--pairs required for scene files");
    for (const std::string& token : pair_tokens) {
      const size_t colon = token.find(':');
      if (colon == std::string::npos) {
        throw std::invalid_argument("pair must be QUERY[@F]:TARGET[@F], got '" + token + "'");
      }
      const auto [qid, qframe] = parse_view_token(token.substr(0, colon), frame);
      const auto [tid, tframe] = parse_view_token(token.substr(colon + 1), frame);
      const ecm::ViewRef query = make_view(scene, qframe, qid, ecm::ViewKind::current);
      const ecm::ViewRef target = make_view(
          scene, tframe, tid,
          tframe == qframe ? ecm::ViewKind::current : ecm::ViewKind::historical);
      run_pair(token, query, target);
    }
  }

  json doc;
  doc["grid"] = {{"h", grid.h}, {"w", grid.w}};
  doc["anchors"] = anchors.values;
  doc["pairs"] = pairs;
  emit(out_path, doc.dump(2) + "\n");
  return 0;
}

int cmd_sample(int window_start, int window_len, int n_context, uint64_t seed,
               const std::string& mode, int total_frames, int stride, int n_hist,
               const std::string& out_path) {
  json doc;
  if (mode.empty()) {
    const ecm::SamplingPlan plan =
        ecm::sample_training_frames(window_start, window_len, n_context, seed);
    doc["window_start"] = plan.window_start;
    doc["window_len"] = plan.window_len;
    doc["seed"] = seed;
    doc["generation_frame"] = plan.generation_frame;
    doc["context_frames"] = plan.context_frames;
  } else {
    ecm::ScheduleMode m;
    if (mode == "chrono") {
      m = ecm::ScheduleMode::chronological;
    } else if (mode == "reverse") {
      m = ecm::ScheduleMode::reverse;
    } else if (mode == "stride") {
      m = ecm::ScheduleMode::stride;
    } else {
      throw std::invalid_argument("--mode must be chrono, reverse or stride");
    }
    const ecm::InferenceSchedule sched =
        ecm::build_inference_schedule(total_frames, m, stride, n_hist);
    doc["mode"] = mode;
    doc["total_frames"] = total_frames;
    doc["stride"] = stride;
    doc["n_hist"] = n_hist;
    doc["steps"] = json::array();
    for (const ecm::ScheduleStep& step : sched.steps) {
      doc["steps"].push_back(
          {{"generation_frame", step.generation_frame}, {"context_frames", step.context_frames}});
    }
  }
  emit(out_path, doc.dump(2) + "\n");
  return 0;
}

int cmd_inject(const std::string& scene_arg, int frame, const std::string& view_id,
               const std::string& latent_in, const std::string& out_path, uint64_t seed,
               int embed_dim) {
  const ecm::Scene scene = load_scene_arg(scene_arg);
  ecm::FeatureMap latent = ecm::feature_map_from_tensor(ecm::read_tensor(latent_in));

  ecm::InjectConfig config;
  config.seed = seed;
  config.embed_dim = embed_dim;
  const ecm::FeatureMap injected =
      ecm::inject_frame_conditions(scene, frame, view_id, latent, config);
  ecm::write_tensor(out_path, ecm::to_tensor(injected));
  return 0;
}

int cmd_render(const std::string& scene_arg, int frame, const std::string& view_id,
               const GridSpec& grid, const std::string& out_path, const std::string& rgb_out,
               const std::string& depth_out) {
  const ecm::Scene scene = load_scene_arg(scene_arg);
  const ecm::SyntheticScene world = ecm::demo_scene();
  const ecm::RenderedView view = ecm::render(world, scene.camera(frame, view_id),
                                             scene.frame(frame).ego_pose, grid.h, grid.w);
  if (!out_path.empty()) ecm::write_ppm(out_path, view.rgb);
  if (!rgb_out.empty()) ecm::write_tensor(rgb_out, ecm::to_tensor(view.rgb));
  if (!depth_out.empty()) {
    ecm::Tensor t;
    t.dims = {static_cast<uint32_t>(grid.h), static_cast<uint32_t>(grid.w)};
    t.data.reserve(view.depth.size());
    for (double d : view.depth) t.data.push_back(static_cast<float>(d));
    ecm::write_tensor(depth_out, t);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"explicit camera-modeling kernels: overlap matching, correspondence "
               "verification, frame sampling and condition injection"};
  app.require_subcommand(1);

  std::string scene_arg = "synthetic";
  int frame = 0;
  std::string grid_str = "28x50";
  std::string anchor_str = "1:60:10";
  std::string out_path;
  uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd, bool with_scene = true) {
    if (with_scene) {
      cmd->add_option("--scene", scene_arg, "scene JSON path or 'synthetic'");
      cmd->add_option("--frame", frame, "frame index");
    }
    cmd->add_option("--grid", grid_str, "latent grid as HxW");
    cmd->add_option("--anchors", anchor_str, "depth anchors as DMIN:DMAX:D");
    cmd->add_option("--out", out_path, "output path (default stdout)");
  };

  // overlap
  auto* overlap = app.add_subcommand("overlap", "rank candidate views by frustum overlap");
  std::string query_view = "front";
  std::vector<std::string> candidates;
  int k = 2;
  add_common(overlap);
  overlap->add_option("--query-view", query_view, "query view id");
  overlap->add_option("--candidates", candidates, "candidate tokens VIEW or VIEW@FRAME")
      ->delimiter(',');
  overlap->add_option("--k", k, "number of target views to keep");

  // verify
  auto* verify = app.add_subcommand("verify", "ray-cast ground-truth correspondence check");
  std::vector<std::string> pairs;
  double baseline = 0.5;
  add_common(verify);
  verify->add_option("--pairs", pairs,
                     "synthetic: identity|translate|opposite; scenes: QUERY[@F]:TARGET[@F]")
      ->delimiter(',');
  verify->add_option("--baseline", baseline, "translation for the synthetic 'translate' pair [m]");

  // sample
  auto* sample = app.add_subcommand("sample", "training frame plan or inference schedule");
  int window_start = 0, window_len = 12, n_context = 3;
  std::string mode;
  int total_frames = 8, stride = 1, n_hist = 3;
  sample->add_option("--window-start", window_start, "window start frame");
  sample->add_option("--window-len", window_len, "window length");
  sample->add_option("--n-context", n_context, "context frames per plan");
  sample->add_option("--seed", seed, "sampler seed");
  sample->add_option("--mode", mode, "schedule mode: chrono, reverse or stride");
  sample->add_option("--frames", total_frames, "total frames for schedules");
  sample->add_option("--stride", stride, "context stride");
  sample->add_option("--n-hist", n_hist, "history depth for schedules");
  sample->add_option("--out", out_path, "output path (default stdout)");

  // inject
  auto* inject = app.add_subcommand("inject", "scatter frame conditions into a latent tensor");
  std::string inject_view = "front";
  std::string latent_in;
  int embed_dim = 16;
  inject->add_option("--scene", scene_arg, "scene JSON path or 'synthetic'");
  inject->add_option("--frame", frame, "frame index");
  inject->add_option("--view", inject_view, "camera view id");
  inject->add_option("--latent-in", latent_in, "input latent tensor path")->required();
  inject->add_option("--out", out_path, "output tensor path")->required();
  inject->add_option("--seed", seed, "pipeline seed");
  inject->add_option("--embed-dim", embed_dim, "condition embedding width");

  // render
  auto* render = app.add_subcommand("render", "ray-cast the synthetic world to PPM/tensors");
  std::string render_view = "front";
  std::string rgb_out, depth_out;
  render->add_option("--scene", scene_arg, "scene JSON path or 'synthetic'");
  render->add_option("--frame", frame, "frame index");
  render->add_option("--view", render_view, "camera view id");
  render->add_option("--grid", grid_str, "render grid as HxW");
  render->add_option("--out", out_path, "PPM output path");
  render->add_option("--rgb-out", rgb_out, "RGB tensor output path");
  render->add_option("--depth-out", depth_out, "depth tensor output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const GridSpec grid = parse_grid(grid_str);
    const ecm::DepthAnchors anchors = parse_anchors(anchor_str);
    if (overlap->parsed()) {
      return cmd_overlap(scene_arg, frame, query_view, candidates, k, grid, anchors, out_path);
    }
    if (verify->parsed()) {
      return cmd_verify(scene_arg, frame, pairs, baseline, grid, anchors, out_path);
    }
    if (sample->parsed()) {
      return cmd_sample(window_start, window_len, n_context, seed, mode, total_frames, stride,
                        n_hist, out_path);
    }
    if (inject->parsed()) {
      return cmd_inject(scene_arg, frame, inject_view, latent_in, out_path, seed, embed_dim);
    }
    if (render->parsed()) {
      return cmd_render(scene_arg, frame, render_view, grid, out_path, rgb_out, depth_out);
    }
  } catch (const ecm::MalformedFile& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
