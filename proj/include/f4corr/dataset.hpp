#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "f4corr/field.hpp"
#include "f4corr/rng.hpp"

namespace f4corr {

struct LabeledImage {
  SpatialField pixels;  // 28x28, values in [0,1]
  int label = 0;        // 0..9
};

struct DatasetSplit {
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> test;
  uint64_t seed = 0;
};

enum class IdxKind { images, labels };

struct IdxTensor {
  std::vector<uint32_t> dims;
  std::vector<uint8_t> data;
};

/// Decode an IDX container (big-endian header). Magic 0x00000803 for
/// 3-D u8 images, 0x00000801 for 1-D u8 labels.
IdxTensor parse_idx(const std::vector<uint8_t>& bytes, IdxKind expect);

/// Canonical re-encoding; round-trips parse_idx byte-identically.
std::vector<uint8_t> write_idx(const IdxTensor& tensor, IdxKind kind);

/// Read image+label IDX files and normalize pixels to [0,1] (divide by 255).
std::vector<LabeledImage> load_idx_pair(const std::string& images_path,
                                        const std::string& labels_path);

/// Label-stratified subsample: train_n/10 per class train, test_n/10 per
/// class test, disjoint, deterministic per seed.
DatasetSplit subsample(const std::vector<LabeledImage>& full, int train_n, int test_n,
                       uint64_t seed);

/// Procedural digit-like glyphs (10 templates + seeded jitter); offline
/// stand-in corpus when the MNIST files are not available.
std::vector<LabeledImage> synthetic_corpus(int count, uint64_t seed);

}  // namespace f4corr
