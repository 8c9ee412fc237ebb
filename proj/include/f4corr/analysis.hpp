#pragma once

#include <vector>

#include "f4corr/field.hpp"

namespace f4corr {

struct SsimConfig {
  int window = 7;  // square uniform window, odd
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 0.0;  // <= 0: use max-min of the reference (b)

  void validate() const;
};

/// Mean structural similarity over all full windows, in [-1, 1].
/// b is the reference image when dynamic_range is auto.
double ssim(const SpatialField& a, const SpatialField& b, const SsimConfig& cfg);

struct RunSummary {
  std::vector<double> values;
  double mean = 0.0;
  double std_dev = 0.0;  // sample (n-1); 0 for a single run
};

RunSummary aggregate_runs(const std::vector<double>& accuracies);

struct LatencyModel {
  double slm_setup_ms = 25.0;
  double exposure_ms = 20.0;
  double os_overhead_ms = 0.0;
  int kernels_per_image = 1;  // 1 when the device batches all kernels per frame

  void validate() const;
};

/// Images per second under sequential per-kernel device operation.
double throughput(const LatencyModel& model);

}  // namespace f4corr
