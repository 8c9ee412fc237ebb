#include "f4corr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace f4corr {

void SsimConfig::validate() const {
  if (window < 3 || window % 2 == 0) throw ConfigError("ssim window must be odd and >= 3");
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw ConfigError("ssim k1, k2 must be > 0");
}

double ssim(const SpatialField& a, const SpatialField& b, const SsimConfig& cfg) {
  cfg.validate();
  if (a.n() != b.n()) throw ShapeError("ssim size mismatch");
  int n = a.n();
  int w = cfg.window;
  if (n < w) throw ShapeError("ssim window larger than image");

  double range = cfg.dynamic_range;
  if (range <= 0.0) {
    // Auto range over both images keeps the metric symmetric.
    double lo = a.values()[0], hi = a.values()[0];
    for (double v : a.values()) { lo = std::min(lo, v); hi = std::max(hi, v); }
    for (double v : b.values()) { lo = std::min(lo, v); hi = std::max(hi, v); }
    range = hi - lo;
    if (range <= 0.0) range = 1.0;
  }
  double c1 = cfg.k1 * range * cfg.k1 * range;
  double c2 = cfg.k2 * range * cfg.k2 * range;

  double total = 0.0;
  int count = 0;
  double inv_area = 1.0 / (static_cast<double>(w) * w);
  for (int i = 0; i + w <= n; ++i) {
    for (int j = 0; j + w <= n; ++j) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int di = 0; di < w; ++di) {
        for (int dj = 0; dj < w; ++dj) {
          double va = a.at(i + di, j + dj);
          double vb = b.at(i + di, j + dj);
          sa += va;
          sb += vb;
          saa += va * va;
          sbb += vb * vb;
          sab += va * vb;
        }
      }
      double mu_a = sa * inv_area;
      double mu_b = sb * inv_area;
      double var_a = saa * inv_area - mu_a * mu_a;
      double var_b = sbb * inv_area - mu_b * mu_b;
      double cov = sab * inv_area - mu_a * mu_b;
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      ++count;
    }
  }
  return total / count;
}

RunSummary aggregate_runs(const std::vector<double>& accuracies) {
  if (accuracies.empty()) throw ConfigError("aggregate_runs: empty accuracy list");
  RunSummary s;
  s.values = accuracies;
  for (double v : accuracies) s.mean += v;
  s.mean /= accuracies.size();
  if (accuracies.size() > 1) {
    double acc = 0.0;
    for (double v : accuracies) acc += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(acc / (accuracies.size() - 1));
  }
  return s;
}

void LatencyModel::validate() const {
  if (slm_setup_ms < 0 || exposure_ms < 0 || os_overhead_ms < 0) {
    throw ConfigError("latency parameters must be >= 0");
  }
  if (kernels_per_image < 1) throw ConfigError("kernels_per_image must be >= 1");
}

double throughput(const LatencyModel& model) {
  model.validate();
  double per_pass_ms = model.slm_setup_ms + model.exposure_ms + model.os_overhead_ms;
  if (per_pass_ms <= 0.0) throw DomainError("total per-pass latency must be > 0");
  return 1000.0 / (model.kernels_per_image * per_pass_ms);
}

}  // namespace f4corr
