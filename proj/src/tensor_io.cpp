#include "ecm/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "ecm/errors.hpp"

namespace ecm {

namespace {

constexpr char kMagic[4] = {'E', 'C', 'M', 'T'};
constexpr uint8_t kVersion = 1;

void put_u32le(std::string& buf, uint32_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>((v >> 8) & 0xff));
  buf.push_back(static_cast<char>((v >> 16) & 0xff));
  buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
         static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  if (tensor.dims.empty() || tensor.dims.size() > 255) {
    throw std::invalid_argument("tensor: ndim must be in [1, 255]");
  }
  if (tensor.data.size() != tensor.element_count()) {
    throw std::invalid_argument("tensor: payload size does not match dims");
  }
  std::string buf;
  buf.reserve(6 + 4 * tensor.dims.size() + 4 * tensor.data.size());
  buf.append(kMagic, 4);
  buf.push_back(static_cast<char>(kVersion));
  buf.push_back(static_cast<char>(tensor.dims.size()));
  for (uint32_t d : tensor.dims) put_u32le(buf, d);
  for (float f : tensor.data) put_u32le(buf, std::bit_cast<uint32_t>(f));
  atomic_write(path, buf);
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedFile("cannot open tensor file: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());

  if (bytes.size() < 6 || std::memcmp(p, kMagic, 4) != 0) {
    throw MalformedFile("tensor file: bad magic: " + path.string());
  }
  if (p[4] != kVersion) throw MalformedFile("tensor file: unsupported version");
  const size_t ndim = p[5];
  if (ndim == 0 || bytes.size() < 6 + 4 * ndim) {
    throw MalformedFile("tensor file: truncated header");
  }

  Tensor t;
  t.dims.resize(ndim);
  for (size_t i = 0; i < ndim; ++i) t.dims[i] = get_u32le(p + 6 + 4 * i);
  const size_t count = t.element_count();
  const size_t payload_at = 6 + 4 * ndim;
  if (bytes.size() != payload_at + 4 * count) {
    throw MalformedFile("tensor file: payload size mismatch");
  }
  t.data.resize(count);
  for (size_t i = 0; i < count; ++i) {
    t.data[i] = std::bit_cast<float>(get_u32le(p + payload_at + 4 * i));
  }
  return t;
}

Tensor to_tensor(const FeatureMap& map) {
  Tensor t;
  t.dims = {static_cast<uint32_t>(map.channels), static_cast<uint32_t>(map.height),
            static_cast<uint32_t>(map.width)};
  t.data = map.data;
  return t;
}

FeatureMap feature_map_from_tensor(const Tensor& tensor) {
  if (tensor.dims.size() != 3) {
    throw MalformedFile("tensor: expected 3 dims (C x H x W) for a feature map");
  }
  FeatureMap map(static_cast<int>(tensor.dims[0]), static_cast<int>(tensor.dims[1]),
                 static_cast<int>(tensor.dims[2]));
  map.data = tensor.data;
  return map;
}

Tensor field_targets_tensor(const CorrespondenceField& field) {
  Tensor t;
  t.dims = {static_cast<uint32_t>(field.grid_h), static_cast<uint32_t>(field.grid_w),
            static_cast<uint32_t>(field.anchors.count()), 2};
  t.data.reserve(field.targets.size() * 2);
  for (const PixelCoord& p : field.targets) {
    t.data.push_back(static_cast<float>(p.u));
    t.data.push_back(static_cast<float>(p.v));
  }
  return t;
}

Tensor field_valid_tensor(const CorrespondenceField& field) {
  Tensor t;
  t.dims = {static_cast<uint32_t>(field.grid_h), static_cast<uint32_t>(field.grid_w),
            static_cast<uint32_t>(field.anchors.count())};
  t.data.reserve(field.valid.size());
  for (uint8_t v : field.valid) t.data.push_back(v ? 1.0f : 0.0f);
  return t;
}

void write_ppm(const std::filesystem::path& path, const FeatureMap& rgb) {
  if (rgb.channels != 3) throw std::invalid_argument("ppm: need a 3-channel map");
  std::string buf = "P6\n" + std::to_string(rgb.width) + " " + std::to_string(rgb.height) +
                    "\n255\n";
  buf.reserve(buf.size() + static_cast<size_t>(rgb.width) * rgb.height * 3);
  for (int h = 0; h < rgb.height; ++h) {
    for (int w = 0; w < rgb.width; ++w) {
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(rgb.at(c, h, w), 0.0f, 1.0f);
        buf.push_back(static_cast<char>(static_cast<int>(v * 255.0f + 0.5f)));
      }
    }
  }
  atomic_write(path, buf);
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  atomic_write(path, text);
}

}  // namespace ecm
