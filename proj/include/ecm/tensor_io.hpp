#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ecm/attention.hpp"
#include "ecm/correspondence.hpp"

namespace ecm {

/// N-dimensional float tensor as stored on disk: magic "ECMT", version byte
/// 1, ndim byte, then ndim little-endian u32 dims and the row-major f32
/// payload (last dimension fastest).
struct Tensor {
  std::vector<uint32_t> dims;
  std::vector<float> data;

  size_t element_count() const {
    size_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }
};

// Writes atomically (temp file + rename).
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);

// Throws MalformedFile on bad magic/version or a truncated payload.
Tensor read_tensor(const std::filesystem::path& path);

Tensor to_tensor(const FeatureMap& map);
FeatureMap feature_map_from_tensor(const Tensor& tensor);  // expects 3 dims C x H x W

// Correspondence fields serialize as two tensors: the target coordinates
// (H x W x D x 2, u then v) and the validity mask (H x W x D, 0/1).
Tensor field_targets_tensor(const CorrespondenceField& field);
Tensor field_valid_tensor(const CorrespondenceField& field);

// 8-bit binary PPM of a 3-channel map, values clamped to [0, 1].
void write_ppm(const std::filesystem::path& path, const FeatureMap& rgb);

// Atomic text-file write (temp file + rename), shared by the CLI reports.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace ecm
