#include "f4corr/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

namespace f4corr {

namespace {

uint32_t read_be32(const std::vector<uint8_t>& bytes, size_t offset) {
  if (offset + 4 > bytes.size()) throw FormatError("truncated IDX header");
  return (static_cast<uint32_t>(bytes[offset]) << 24) |
         (static_cast<uint32_t>(bytes[offset + 1]) << 16) |
         (static_cast<uint32_t>(bytes[offset + 2]) << 8) | static_cast<uint32_t>(bytes[offset + 3]);
}

void push_be32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v >> 24));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v));
}

constexpr uint32_t kMagicImages = 0x00000803;
constexpr uint32_t kMagicLabels = 0x00000801;

}  // namespace

IdxTensor parse_idx(const std::vector<uint8_t>& bytes, IdxKind expect) {
  uint32_t magic = read_be32(bytes, 0);
  uint32_t want = expect == IdxKind::images ? kMagicImages : kMagicLabels;
  if (magic != want) {
    throw FormatError("bad IDX magic: got " + std::to_string(magic) + ", expected " +
                      std::to_string(want));
  }
  size_t ndims = expect == IdxKind::images ? 3 : 1;
  IdxTensor t;
  size_t offset = 4;
  size_t total = 1;
  for (size_t d = 0; d < ndims; ++d) {
    uint32_t dim = read_be32(bytes, offset);
    offset += 4;
    t.dims.push_back(dim);
    total *= dim;
  }
  if (bytes.size() - offset != total) {
    throw FormatError("IDX payload length mismatch: have " +
                      std::to_string(bytes.size() - offset) + ", need " + std::to_string(total));
  }
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return t;
}

std::vector<uint8_t> write_idx(const IdxTensor& tensor, IdxKind kind) {
  std::vector<uint8_t> out;
  push_be32(out, kind == IdxKind::images ? kMagicImages : kMagicLabels);
  for (uint32_t d : tensor.dims) push_be32(out, d);
  out.insert(out.end(), tensor.data.begin(), tensor.data.end());
  return out;
}

std::vector<LabeledImage> load_idx_pair(const std::string& images_path,
                                        const std::string& labels_path) {
  auto read_all = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>());
  };
  IdxTensor images = parse_idx(read_all(images_path), IdxKind::images);
  IdxTensor labels = parse_idx(read_all(labels_path), IdxKind::labels);
  if (images.dims[0] != labels.dims[0]) throw FormatError("image/label count mismatch");
  if (images.dims[1] != 28 || images.dims[2] != 28) throw FormatError("expected 28x28 images");

  std::vector<LabeledImage> out;
  out.reserve(images.dims[0]);
  for (uint32_t i = 0; i < images.dims[0]; ++i) {
    std::vector<double> pixels(28 * 28);
    for (size_t p = 0; p < pixels.size(); ++p) {
      pixels[p] = images.data[static_cast<size_t>(i) * 28 * 28 + p] / 255.0;
    }
    out.push_back({SpatialField(28, std::move(pixels)), static_cast<int>(labels.data[i])});
  }
  return out;
}

DatasetSplit subsample(const std::vector<LabeledImage>& full, int train_n, int test_n,
                       uint64_t seed) {
  if (train_n % 10 != 0 || test_n % 10 != 0) {
    throw ConfigError("split sizes must be multiples of 10 for stratification");
  }
  int per_class_train = train_n / 10;
  int per_class_test = test_n / 10;

  std::array<std::vector<size_t>, 10> by_class;
  for (size_t i = 0; i < full.size(); ++i) by_class[full[i].label].push_back(i);

  RngStream rng(seed, /*stream=*/0x5u);
  DatasetSplit split;
  split.seed = seed;
  for (int c = 0; c < 10; ++c) {
    auto& pool = by_class[c];
    if (static_cast<int>(pool.size()) < per_class_train + per_class_test) {
      throw ConfigError("not enough samples of class " + std::to_string(c));
    }
    for (size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.next_below(i)]);
    for (int i = 0; i < per_class_train; ++i) split.train.push_back(full[pool[i]]);
    for (int i = 0; i < per_class_test; ++i) {
      split.test.push_back(full[pool[per_class_train + i]]);
    }
  }
  // Interleave classes rather than leaving them blocked.
  RngStream shuffle_rng(seed, /*stream=*/0x6u);
  auto shuffle = [&shuffle_rng](std::vector<LabeledImage>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[shuffle_rng.next_below(i)]);
  };
  shuffle(split.train);
  shuffle(split.test);
  return split;
}

namespace {

// Seven-segment style strokes on a 28x28 canvas; endpoints in pixel
// coordinates. Distinct enough to learn, confusable enough (shared
// segments) that noisy renderings are not trivially separable.
struct Segment {
  double x0, y0, x1, y1;
};

const std::array<std::vector<Segment>, 10>& digit_strokes() {
  static const double L = 7, R = 21, T = 5, M = 14, B = 23;
  static const Segment a{T, L, T, R}, b{T, R, M, R}, c{M, R, B, R}, d{B, L, B, R},
      e{M, L, B, L}, f{T, L, M, L}, g{M, L, M, R};
  static const std::array<std::vector<Segment>, 10> strokes = {{
      {a, b, c, d, e, f},     // 0
      {b, c},                 // 1
      {a, b, g, e, d},        // 2
      {a, b, g, c, d},        // 3
      {f, g, b, c},           // 4
      {a, f, g, c, d},        // 5
      {a, f, g, e, d, c},     // 6
      {a, b, c},              // 7
      {a, b, c, d, e, f, g},  // 8
      {a, b, c, d, f, g},     // 9
  }};
  return strokes;
}

double point_segment_distance(double px, double py, const Segment& s) {
  double vx = s.x1 - s.x0, vy = s.y1 - s.y0;
  double wx = px - s.x0, wy = py - s.y0;
  double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? std::clamp((wx * vx + wy * vy) / len2, 0.0, 1.0) : 0.0;
  double dx = px - (s.x0 + t * vx), dy = py - (s.y0 + t * vy);
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

std::vector<LabeledImage> synthetic_corpus(int count, uint64_t seed) {
  if (count <= 0) throw ConfigError("synthetic_corpus: count must be > 0");
  std::vector<LabeledImage> out;
  out.reserve(count);
  RngStream rng(seed, /*stream=*/0x51u);

  for (int i = 0; i < count; ++i) {
    int label = i % 10;
    double shift_x = rng.uniform(-1.5, 1.5);
    double shift_y = rng.uniform(-1.5, 1.5);
    double shear = rng.uniform(-0.10, 0.10);  // rows slide sideways
    double thickness = rng.uniform(1.0, 2.0);
    double amplitude = rng.uniform(0.40, 1.0);
    double noise = rng.uniform(0.10, 0.22);

    // per-image segment dropout blurs class boundaries the way sloppy
    // handwriting does (e.g. 8 vs 9, 5 vs 6)
    std::vector<Segment> strokes = digit_strokes()[label];
    if (strokes.size() > 2 && rng.uniform() < 0.10) {
      strokes.erase(strokes.begin() + static_cast<std::ptrdiff_t>(rng.next_below(strokes.size())));
    }

    SpatialField img(28);
    for (int r = 0; r < 28; ++r) {
      for (int col = 0; col < 28; ++col) {
        double rr = r - shift_x;
        double cc = col - shift_y - shear * (r - 14.0);
        double best = 1e9;
        for (const Segment& s : strokes) {
          best = std::min(best, point_segment_distance(rr, cc, s));
        }
        double v = amplitude * std::clamp(thickness - best, 0.0, 1.0);
        v += noise * rng.gaussian();
        img.at(r, col) = std::clamp(v, 0.0, 1.0);
      }
    }
    // occlusion patches
    for (int p = 0; p < 1; ++p) {
      int pr = static_cast<int>(rng.next_below(24));
      int pc = static_cast<int>(rng.next_below(24));
      for (int dr = 0; dr < 4; ++dr) {
        for (int dc = 0; dc < 4; ++dc) img.at(pr + dr, pc + dc) = 0.0;
      }
    }
    out.push_back({std::move(img), label});
  }
  return out;
}

}  // namespace f4corr
