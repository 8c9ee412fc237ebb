#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "f4corr/errors.hpp"

namespace f4corr {

/// Real n-by-n grid, row-major. Carries input images and captured
/// convolution outputs (dimensionless amplitude).
class SpatialField {
 public:
  SpatialField() = default;
  explicit SpatialField(int n, double fill = 0.0);
  SpatialField(int n, std::vector<double> values);

  int n() const { return n_; }
  double& at(int row, int col) { return values_[static_cast<size_t>(row) * n_ + col]; }
  double at(int row, int col) const { return values_[static_cast<size_t>(row) * n_ + col]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  size_t size() const { return values_.size(); }

  bool finite() const;
  double energy() const;  // sum of squares

 private:
  int n_ = 0;
  std::vector<double> values_;
};

/// Complex n-by-n spectrum with the DC component stored at (n/2, n/2),
/// mirroring the optical Fourier plane.
class FrequencyField {
 public:
  FrequencyField() = default;
  explicit FrequencyField(int n);
  FrequencyField(int n, std::vector<std::complex<double>> values);

  int n() const { return n_; }
  std::complex<double>& at(int row, int col) {
    return values_[static_cast<size_t>(row) * n_ + col];
  }
  std::complex<double> at(int row, int col) const {
    return values_[static_cast<size_t>(row) * n_ + col];
  }
  std::vector<std::complex<double>>& values() { return values_; }
  const std::vector<std::complex<double>>& values() const { return values_; }
  size_t size() const { return values_.size(); }

  bool finite() const;
  double energy() const;  // sum of |.|^2

 private:
  int n_ = 0;
  std::vector<std::complex<double>> values_;
};

// Flat binary layout: 16-byte header (magic "F4FD", u32 n, u32 kind,
// u32 reserved), then row-major little-endian f64 payload. Frequency
// fields store interleaved (re, im) pairs. kind: 0 spatial, 1 frequency.
void write_field(std::ostream& out, const SpatialField& f);
void write_field(std::ostream& out, const FrequencyField& f);
SpatialField read_spatial_field(std::istream& in);
FrequencyField read_frequency_field(std::istream& in);

std::string field_to_json(const SpatialField& f);

double max_abs_diff(const SpatialField& a, const SpatialField& b);
double relative_l2_error(const SpatialField& got, const SpatialField& want);

}  // namespace f4corr
