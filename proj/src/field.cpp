#include "f4corr/field.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace f4corr {

namespace {
constexpr char kMagic[4] = {'F', '4', 'F', 'D'};
constexpr uint32_t kKindSpatial = 0;
constexpr uint32_t kKindFrequency = 1;

void check_side(int n) {
  if (n < 2 || n % 2 != 0) {
    throw InvalidFieldError("field side must be even and >= 2, got " + std::to_string(n));
  }
}

void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw FormatError("truncated field header");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw FormatError("truncated field payload");
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

uint32_t read_header(std::istream& in, uint32_t expect_kind) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad field magic");
  uint32_t n = read_u32(in);
  uint32_t kind = read_u32(in);
  read_u32(in);  // reserved
  if (kind != expect_kind) throw FormatError("unexpected field kind " + std::to_string(kind));
  return n;
}

void write_header(std::ostream& out, uint32_t n, uint32_t kind) {
  out.write(kMagic, 4);
  write_u32(out, n);
  write_u32(out, kind);
  write_u32(out, 0);
}
}  // namespace

SpatialField::SpatialField(int n, double fill)
    : n_(n), values_(static_cast<size_t>(n) * n, fill) {
  check_side(n);
}

SpatialField::SpatialField(int n, std::vector<double> values) : n_(n), values_(std::move(values)) {
  check_side(n);
  if (values_.size() != static_cast<size_t>(n) * n) {
    throw ShapeError("value count does not match side length");
  }
}

bool SpatialField::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double SpatialField::energy() const {
  double e = 0.0;
  for (double v : values_) e += v * v;
  return e;
}

FrequencyField::FrequencyField(int n) : n_(n), values_(static_cast<size_t>(n) * n) {
  check_side(n);
}

FrequencyField::FrequencyField(int n, std::vector<std::complex<double>> values)
    : n_(n), values_(std::move(values)) {
  check_side(n);
  if (values_.size() != static_cast<size_t>(n) * n) {
    throw ShapeError("value count does not match side length");
  }
}

bool FrequencyField::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](const std::complex<double>& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

double FrequencyField::energy() const {
  double e = 0.0;
  for (const auto& v : values_) e += std::norm(v);
  return e;
}

void write_field(std::ostream& out, const SpatialField& f) {
  write_header(out, static_cast<uint32_t>(f.n()), kKindSpatial);
  for (double v : f.values()) write_f64(out, v);
}

void write_field(std::ostream& out, const FrequencyField& f) {
  write_header(out, static_cast<uint32_t>(f.n()), kKindFrequency);
  for (const auto& v : f.values()) {
    write_f64(out, v.real());
    write_f64(out, v.imag());
  }
}

SpatialField read_spatial_field(std::istream& in) {
  uint32_t n = read_header(in, kKindSpatial);
  std::vector<double> values(static_cast<size_t>(n) * n);
  for (double& v : values) v = read_f64(in);
  return SpatialField(static_cast<int>(n), std::move(values));
}

FrequencyField read_frequency_field(std::istream& in) {
  uint32_t n = read_header(in, kKindFrequency);
  std::vector<std::complex<double>> values(static_cast<size_t>(n) * n);
  for (auto& v : values) {
    double re = read_f64(in);
    double im = read_f64(in);
    v = {re, im};
  }
  return FrequencyField(static_cast<int>(n), std::move(values));
}

std::string field_to_json(const SpatialField& f) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"n\":" << f.n() << ",\"values\":[";
  for (size_t i = 0; i < f.values().size(); ++i) {
    if (i) os << ',';
    os << f.values()[i];
  }
  os << "]}";
  return os.str();
}

double max_abs_diff(const SpatialField& a, const SpatialField& b) {
  if (a.n() != b.n()) throw ShapeError("size mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.values().size(); ++i) {
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  }
  return m;
}

double relative_l2_error(const SpatialField& got, const SpatialField& want) {
  if (got.n() != want.n()) throw ShapeError("size mismatch");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < got.values().size(); ++i) {
    double d = got.values()[i] - want.values()[i];
    num += d * d;
    den += want.values()[i] * want.values()[i];
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

}  // namespace f4corr
