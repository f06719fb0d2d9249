#include "ecm/control.hpp"

#include <algorithm>
#include <cmath>

#include "ecm/rng.hpp"

namespace ecm {

namespace {
constexpr double kPi = 3.14159265358979323846;

Eigen::Matrix3d yaw_rotation(double yaw) {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  Eigen::Matrix3d r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}
}  // namespace

void validate_box(const Box3D& b) {
  if (!(b.length > 0.0) || !(b.width > 0.0) || !(b.height > 0.0)) {
    throw std::invalid_argument("box: extents must be positive");
  }
  if (!(b.yaw > -kPi) || !(b.yaw <= kPi)) {
    throw std::invalid_argument("box: yaw must lie in (-pi, pi]");
  }
  if (!std::isfinite(b.center.x) || !std::isfinite(b.center.y) || !std::isfinite(b.center.z)) {
    throw std::invalid_argument("box: non-finite center");
  }
}

EmbeddingProvider::EmbeddingProvider(std::span<const std::string> labels, int dim, uint64_t seed)
    : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("embedding provider: dim must be >= 1");
  for (const std::string& label : labels) {
    if (contains(label)) continue;
    // Per-label stream so the vector does not depend on insertion order.
    std::mt19937_64 eng(mix_seed(seed, fnv1a64(label)));
    std::vector<float> v(dim);
    for (float& x : v) x = static_cast<float>(uniform(eng, -1.0, 1.0));
    table_.emplace_back(label, std::move(v));
  }
  std::sort(table_.begin(), table_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

const std::vector<float>& EmbeddingProvider::at(const std::string& label) const {
  const auto it = std::lower_bound(table_.begin(), table_.end(), label,
                                   [](const auto& e, const std::string& l) { return e.first < l; });
  if (it == table_.end() || it->first != label) {
    throw UnknownLabel("embedding provider: unknown label '" + label + "'");
  }
  return it->second;
}

bool EmbeddingProvider::contains(const std::string& label) const {
  return std::any_of(table_.begin(), table_.end(),
                     [&](const auto& e) { return e.first == label; });
}

ConditionEmbedding encode_box(const Box3D& box, const EmbeddingProvider& provider,
                              const Mlp& mlp) {
  validate_box(box);
  if (mlp.in_dim() != 7) throw std::invalid_argument("encode_box: mlp input width must be 7");
  if (mlp.out_dim() != provider.dim()) {
    throw std::invalid_argument("encode_box: mlp output width must match provider dim");
  }
  const std::vector<float>& cls = provider.at(box.semantic_class);
  const double in[7] = {box.center.x, box.center.y, box.center.z,
                        box.length,   box.width,    box.height,   box.yaw};
  const std::vector<double> geo = mlp.forward(in);

  ConditionEmbedding e;
  e.source = ConditionSource::box;
  e.track_id = box.track_id;
  e.vector.resize(cls.size());
  for (size_t i = 0; i < cls.size(); ++i) {
    e.vector[i] = static_cast<float>(geo[i] + cls[i]);
  }
  return e;
}

std::vector<Eigen::Vector2d> resample_polyline(const MapElement& element, int n_points) {
  const size_t n = element.vertices.size();
  if (n < 2) throw std::invalid_argument("map element: need at least 2 vertices");
  if (element.kind == MapKind::polygon && n < 3) {
    throw std::invalid_argument("map element: polygon needs at least 3 vertices");
  }
  if (n_points < 2) throw std::invalid_argument("map element: resample count must be >= 2");

  const bool closed = element.kind == MapKind::polygon;
  const size_t segs = closed ? n : n - 1;
  std::vector<double> cum(segs + 1, 0.0);
  for (size_t s = 0; s < segs; ++s) {
    const Eigen::Vector2d& a = element.vertices[s];
    const Eigen::Vector2d& b = element.vertices[(s + 1) % n];
    cum[s + 1] = cum[s] + (b - a).norm();
  }
  const double total = cum.back();

  std::vector<Eigen::Vector2d> out(n_points);
  if (total <= 0.0) {
    std::fill(out.begin(), out.end(), element.vertices.front());
    return out;
  }
  // Closed loops omit the duplicate endpoint; open lines keep both ends.
  const double step = closed ? total / n_points : total / (n_points - 1);
  size_t seg = 0;
  for (int i = 0; i < n_points; ++i) {
    const double target = std::min(step * i, total);
    while (seg + 1 < segs && cum[seg + 1] < target) ++seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
    const Eigen::Vector2d& a = element.vertices[seg];
    const Eigen::Vector2d& b = element.vertices[(seg + 1) % n];
    out[i] = a + t * (b - a);
  }
  return out;
}

ConditionEmbedding encode_map(const MapElement& element, const EmbeddingProvider& provider,
                              const Mlp& mlp) {
  if (mlp.in_dim() % 2 != 0 || mlp.in_dim() < 4) {
    throw std::invalid_argument("encode_map: mlp input width must be an even vertex count");
  }
  if (mlp.out_dim() != provider.dim()) {
    throw std::invalid_argument("encode_map: mlp output width must match provider dim");
  }
  const std::vector<float>& cls = provider.at(element.semantic_class);
  const std::vector<Eigen::Vector2d> pts = resample_polyline(element, mlp.in_dim() / 2);
  std::vector<double> in;
  in.reserve(pts.size() * 2);
  for (const Eigen::Vector2d& p : pts) {
    in.push_back(p.x());
    in.push_back(p.y());
  }
  const std::vector<double> geo = mlp.forward(in);

  ConditionEmbedding e;
  e.source = ConditionSource::map;
  e.vector.resize(cls.size());
  for (size_t i = 0; i < cls.size(); ++i) {
    e.vector[i] = static_cast<float>(geo[i] + cls[i]);
  }
  return e;
}

KeypointHead KeypointHead::seeded(int embed_dim, int n_fixed, int n_learned, uint64_t seed) {
  KeypointHead h = zeros(embed_dim, n_fixed, n_learned);
  std::mt19937_64 eng(splitmix64(seed));
  const double bound = 1.0 / std::sqrt(static_cast<double>(embed_dim));
  for (Eigen::Index r = 0; r < h.offset_readout.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.offset_readout.cols(); ++c) {
      h.offset_readout(r, c) = uniform(eng, -bound, bound);
    }
  }
  for (Eigen::Index r = 0; r < h.weight_readout.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.weight_readout.cols(); ++c) {
      h.weight_readout(r, c) = uniform(eng, -bound, bound);
    }
  }
  return h;
}

KeypointHead KeypointHead::zeros(int embed_dim, int n_fixed, int n_learned) {
  if (embed_dim < 1) throw std::invalid_argument("keypoint head: embed dim must be >= 1");
  if (n_fixed < 0 || n_fixed > 15 || n_learned < 0 || n_fixed + n_learned < 1) {
    throw std::invalid_argument("keypoint head: bad keypoint counts");
  }
  KeypointHead h;
  h.offset_readout = Eigen::MatrixXd::Zero(3 * n_learned, embed_dim);
  h.weight_readout = Eigen::MatrixXd::Zero(n_fixed + n_learned, embed_dim);
  return h;
}

std::vector<Keypoint> generate_keypoints(const Box3D& box, const ConditionEmbedding& embedding,
                                         int n_fixed, int n_learned, const KeypointHead& head) {
  validate_box(box);
  if (head.weight_readout.rows() != n_fixed + n_learned ||
      head.offset_readout.rows() != 3 * n_learned) {
    throw std::invalid_argument("generate_keypoints: head shaped for different counts");
  }
  if (head.weight_readout.cols() != static_cast<Eigen::Index>(embedding.vector.size())) {
    throw std::invalid_argument("generate_keypoints: embedding width mismatch");
  }
  if (n_fixed > 15) throw std::invalid_argument("generate_keypoints: at most 15 fixed points");

  static const double kFixedLocal[15][3] = {
      {0, 0, 0},                                                      // center
      {1, 0, 0},  {-1, 0, 0}, {0, 1, 0},  {0, -1, 0}, {0, 0, 1},  {0, 0, -1},  // face centers
      {1, 1, 1},  {1, 1, -1}, {1, -1, 1}, {1, -1, -1},                          // corners
      {-1, 1, 1}, {-1, 1, -1}, {-1, -1, 1}, {-1, -1, -1}};

  const Eigen::Vector3d half(box.length / 2.0, box.width / 2.0, box.height / 2.0);
  const Eigen::Matrix3d rot = yaw_rotation(box.yaw);
  const Eigen::Vector3d center = box.center.vec();

  Eigen::VectorXd e(embedding.vector.size());
  for (size_t i = 0; i < embedding.vector.size(); ++i) e(i) = embedding.vector[i];

  std::vector<Keypoint> out;
  out.reserve(n_fixed + n_learned);
  for (int i = 0; i < n_fixed; ++i) {
    const Eigen::Vector3d local(kFixedLocal[i][0] * half.x(), kFixedLocal[i][1] * half.y(),
                                kFixedLocal[i][2] * half.z());
    out.push_back({Point3::of(center + rot * local, Frame::ego), 0.0});
  }
  if (n_learned > 0) {
    const Eigen::VectorXd offsets = head.offset_readout * e;
    for (int j = 0; j < n_learned; ++j) {
      const Eigen::Vector3d local(offsets(3 * j) * half.x(), offsets(3 * j + 1) * half.y(),
                                  offsets(3 * j + 2) * half.z());
      out.push_back({Point3::of(center + rot * local, Frame::ego), 0.0});
    }
  }

  const Eigen::VectorXd logits = head.weight_readout * e;
  const std::vector<double> w = softmax(std::span<const double>(logits.data(), logits.size()));
  for (size_t i = 0; i < out.size(); ++i) out[i].weight = w[i];
  return out;
}

std::vector<float> aggregate_appearance(std::span<const Keypoint> keypoints,
                                        const FeatureMap& features, const CameraModel& cam) {
  const CameraModel grid_cam = cam.scaled_to(features.width, features.height);
  std::vector<double> acc(features.channels, 0.0);
  for (const Keypoint& kp : keypoints) {
    const Projection pr = project(kp.position, grid_cam);
    if (!pr.valid) continue;
    const std::vector<float> f = gather_bilinear(features, pr.pixel);
    for (int c = 0; c < features.channels; ++c) acc[c] += kp.weight * f[c];
  }
  std::vector<float> out(features.channels);
  for (int c = 0; c < features.channels; ++c) out[c] = static_cast<float>(acc[c]);
  return out;
}

ConditionEmbedding update_embedding_identity(ConditionEmbedding embedding,
                                             std::span<const std::vector<float>> appearances,
                                             const Box3D& box, int n_fixed, int n_learned,
                                             const KeypointHead& head) {
  for (const std::vector<float>& a : appearances) {
    if (a.size() != embedding.vector.size()) {
      throw std::invalid_argument("update_embedding_identity: channel width mismatch");
    }
    for (size_t i = 0; i < a.size(); ++i) embedding.vector[i] += a[i];
  }
  if (!appearances.empty()) {
    embedding.keypoints = generate_keypoints(box, embedding, n_fixed, n_learned, head);
  }
  return embedding;
}

ChannelAdapter ChannelAdapter::seeded(int in_dim, int out_dim, uint64_t seed) {
  if (in_dim < 1 || out_dim < 1) throw std::invalid_argument("channel adapter: bad dims");
  ChannelAdapter a;
  a.weight.resize(out_dim, in_dim);
  std::mt19937_64 eng(splitmix64(seed));
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (int r = 0; r < out_dim; ++r) {
    for (int c = 0; c < in_dim; ++c) {
      a.weight(r, c) = static_cast<float>(uniform(eng, -bound, bound));
    }
  }
  return a;
}

std::vector<float> ChannelAdapter::apply(std::span<const float> v) const {
  if (static_cast<Eigen::Index>(v.size()) != weight.cols()) {
    throw std::invalid_argument("channel adapter: input width mismatch");
  }
  Eigen::VectorXf x = Eigen::Map<const Eigen::VectorXf>(v.data(), v.size());
  Eigen::VectorXf y = weight * x;
  return {y.data(), y.data() + y.size()};
}

FeatureMap scatter_inject(const FeatureMap& latent, const ConditionEmbedding& embedding,
                          const CameraModel& cam, const ChannelAdapter* adapter) {
  std::vector<float> vec;
  if (adapter != nullptr) {
    vec = adapter->apply(embedding.vector);
    if (static_cast<int>(vec.size()) != latent.channels) {
      throw std::invalid_argument("scatter_inject: adapter output width mismatch");
    }
  } else {
    if (static_cast<int>(embedding.vector.size()) != latent.channels) {
      throw std::invalid_argument("scatter_inject: embedding width must match latent channels");
    }
    vec.assign(embedding.vector.begin(), embedding.vector.end());
  }

  FeatureMap out = latent;
  const CameraModel grid_cam = cam.scaled_to(latent.width, latent.height);
  const size_t plane = static_cast<size_t>(latent.height) * latent.width;

  for (const Keypoint& kp : embedding.keypoints) {
    const Projection pr = project(kp.position, grid_cam);
    if (!pr.valid) continue;
    const double x = pr.pixel.u - 0.5;
    const double y = pr.pixel.v - 0.5;
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    const double tap_w[4] = {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy};
    const int tx[4] = {x0, x0 + 1, x0, x0 + 1};
    const int ty[4] = {y0, y0, y0 + 1, y0 + 1};
    for (int t = 0; t < 4; ++t) {
      if (tx[t] < 0 || tx[t] >= latent.width || ty[t] < 0 || ty[t] >= latent.height) continue;
      const double w = kp.weight * tap_w[t];
      const size_t base = static_cast<size_t>(ty[t]) * latent.width + tx[t];
      for (int c = 0; c < latent.channels; ++c) {
        out.data[base + c * plane] = static_cast<float>(out.data[base + c * plane] + w * vec[c]);
      }
    }
  }
  return out;
}

std::vector<Keypoint> map_keypoints(const MapElement& element, int n_points) {
  const std::vector<Eigen::Vector2d> pts = resample_polyline(element, n_points);
  std::vector<Keypoint> out;
  out.reserve(pts.size());
  const double w = 1.0 / static_cast<double>(pts.size());
  for (const Eigen::Vector2d& p : pts) {
    out.push_back({Point3{p.x(), p.y(), 0.0, Frame::ego}, w});
  }
  return out;
}

}  // namespace ecm
