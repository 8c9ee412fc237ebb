#include "f4corr/optics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "f4corr/analysis.hpp"

namespace f4corr {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void SlmConfig::validate() const {
  if (bit_depth < 1 || bit_depth > 16) {
    throw ConfigError("slm bit_depth must be in [1,16], got " + std::to_string(bit_depth));
  }
  if (!(range_min < range_max)) throw ConfigError("slm value_range must have min < max");
}

void CameraConfig::validate() const {
  if (noise_sigma < 0.0) throw ConfigError("camera noise_sigma must be >= 0");
  if (bit_depth < 0 || bit_depth > 16) throw ConfigError("camera bit_depth must be in [0,16]");
  if (!(saturation > 0.0)) throw ConfigError("camera saturation must be > 0");
}

void DeviceConfig::validate() const {
  slm1.validate();
  slm2.validate();
  camera.validate();
  if (std::abs(misalign_dx) > 2.0 || std::abs(misalign_dy) > 2.0) {
    throw ConfigError("misalignment beyond 2 pixels is outside the model's validity");
  }
  if (slm_setup_ms < 0.0) throw ConfigError("slm_setup_ms must be >= 0");
}

DeviceConfig transparent_device() {
  DeviceConfig cfg;
  cfg.slm1.quantize = false;
  cfg.slm2.quantize = false;
  cfg.camera.readout = CameraReadout::ideal_real;
  cfg.camera.noise_sigma = 0.0;
  cfg.camera.bit_depth = 0;
  return cfg;
}

DeviceConfig paper_like_device() {
  DeviceConfig cfg;
  cfg.slm1.quantize = true;
  cfg.slm1.bit_depth = 8;
  cfg.slm2.quantize = true;
  cfg.slm2.bit_depth = 8;
  cfg.camera.readout = CameraReadout::ideal_real;
  cfg.camera.bit_depth = 8;
  cfg.camera.saturation = 4.0;
  // Residual lens misalignment plus readout noise, calibrated jointly
  // against the edge-detection SSIM study (target mean 0.8 over 100
  // held-out images). Most fidelity loss is systematic (misalignment,
  // quantization); the stochastic part is small, as on the bench.
  cfg.misalign_dx = 0.2;
  cfg.misalign_dy = 0.2;
  cfg.camera.noise_sigma = 0.04;
  return cfg;
}

namespace {
double quantize_one(double v, double lo, double hi, int levels_minus_1) {
  v = std::clamp(v, lo, hi);
  double t = (v - lo) / (hi - lo) * levels_minus_1;
  double idx = std::floor(t + 0.5);  // mid-tread, ties toward +inf
  return lo + idx * (hi - lo) / levels_minus_1;
}
}  // namespace

std::vector<double> quantize(const std::vector<double>& values, const SlmConfig& cfg) {
  cfg.validate();
  if (!cfg.quantize) return values;
  int lm1 = (1 << cfg.bit_depth) - 1;
  std::vector<double> out(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    out[i] = quantize_one(values[i], cfg.range_min, cfg.range_max, lm1);
  }
  return out;
}

SpatialField encode_input(const SpatialField& image, const SlmConfig& cfg) {
  for (double v : image.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw RangeError("input pixel outside [0,1]: " + std::to_string(v));
    }
  }
  return SpatialField(image.n(), quantize(image.values(), cfg));
}

FrequencyField apply_kernel(const FrequencyField& freq, const FrequencyField& kernel_freq,
                            const SlmConfig& cfg) {
  if (freq.n() != kernel_freq.n()) throw ShapeError("spectrum size mismatch");
  cfg.validate();

  std::vector<std::complex<double>> kernel = kernel_freq.values();
  if (cfg.quantize) {
    // Real and imaginary parts quantized independently over their own
    // observed ranges (per-kernel auto-ranging 8-bit encoding).
    double re_lo = std::numeric_limits<double>::infinity(), re_hi = -re_lo;
    double im_lo = re_lo, im_hi = -re_lo;
    for (const auto& v : kernel) {
      re_lo = std::min(re_lo, v.real());
      re_hi = std::max(re_hi, v.real());
      im_lo = std::min(im_lo, v.imag());
      im_hi = std::max(im_hi, v.imag());
    }
    int lm1 = (1 << cfg.bit_depth) - 1;
    for (auto& v : kernel) {
      double re = re_hi > re_lo ? quantize_one(v.real(), re_lo, re_hi, lm1) : v.real();
      double im = im_hi > im_lo ? quantize_one(v.imag(), im_lo, im_hi, lm1) : v.imag();
      v = {re, im};
    }
  }

  FrequencyField out(freq.n());
  for (size_t i = 0; i < out.size(); ++i) out.values()[i] = freq.values()[i] * kernel[i];
  return out;
}

SpatialField capture(const std::vector<std::complex<double>>& field, int n,
                     const CameraConfig& cfg, RngStream& rng) {
  cfg.validate();
  bool signed_out = cfg.readout == CameraReadout::ideal_real;
  double lo = signed_out ? -cfg.saturation : 0.0;
  double hi = cfg.saturation;

  SpatialField out(n);
  for (size_t i = 0; i < field.size(); ++i) {
    double v;
    switch (cfg.readout) {
      case CameraReadout::ideal_real: v = field[i].real(); break;
      case CameraReadout::magnitude: v = std::abs(field[i]); break;
      case CameraReadout::intensity: v = std::norm(field[i]); break;
      default: v = 0.0; break;
    }
    if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * rng.gaussian();
    if (cfg.noise_sigma > 0.0 || cfg.bit_depth > 0) v = std::clamp(v, lo, hi);
    if (cfg.bit_depth > 0) v = quantize_one(v, lo, hi, (1 << cfg.bit_depth) - 1);
    out.values()[i] = v;
  }
  return out;
}

SpatialField optical_convolve(const SpatialField& image, const SpatialField& kernel_spatial,
                              const DeviceConfig& cfg, RngStream& rng) {
  if (image.n() != kernel_spatial.n()) throw ShapeError("image/kernel size mismatch");
  cfg.validate();
  int n = image.n();

  SpatialField encoded = encode_input(image, cfg.slm1);
  FrequencyField spectrum = dft2_centered(encoded);

  if (cfg.misalign_dx != 0.0 || cfg.misalign_dy != 0.0) {
    int s = n / 2;
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        double phase = -2.0 * kPi * (cfg.misalign_dx * (u - s) + cfg.misalign_dy * (v - s)) / n;
        spectrum.at(u, v) *= std::complex<double>(std::cos(phase), std::sin(phase));
      }
    }
  }

  FrequencyField product = apply_kernel(spectrum, dft2_centered(kernel_spatial), cfg.slm2);
  std::vector<std::complex<double>> spatial = idft2_centered(product);
  // The unitary transform pair leaves a 1/n factor relative to the plain
  // convolution sum; fold it back as device gain.
  for (auto& v : spatial) v *= static_cast<double>(n);
  return capture(spatial, n, cfg.camera, rng);
}

SpatialField reference_convolve(const SpatialField& image, const SpatialField& kernel) {
  if (image.n() != kernel.n()) throw ShapeError("image/kernel size mismatch");
  int n = image.n();
  SpatialField out(n);
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      double acc = 0.0;
      for (int a = 0; a < n; ++a) {
        int kx = ((x - a) % n + n) % n;
        for (int b = 0; b < n; ++b) {
          acc += image.at(a, b) * kernel.at(kx, ((y - b) % n + n) % n);
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

double calibrate_noise_sigma(const std::vector<SpatialField>& images, const SpatialField& kernel,
                             DeviceConfig base, const std::vector<double>& sigma_grid,
                             double target_ssim, uint64_t seed) {
  if (images.empty() || sigma_grid.empty()) throw ConfigError("calibration needs images and a sigma grid");
  double best_sigma = sigma_grid.front();
  double best_gap = std::numeric_limits<double>::infinity();
  SsimConfig scfg;
  for (double sigma : sigma_grid) {
    base.camera.noise_sigma = sigma;
    RngStream rng(seed);
    double total = 0.0;
    for (const auto& img : images) {
      FrequencyField prod(img.n());
      {
        auto fi = dft2_centered(img);
        auto fk = dft2_centered(kernel);
        for (size_t i = 0; i < prod.size(); ++i) prod.values()[i] = fi.values()[i] * fk.values()[i];
      }
      auto sp = idft2_centered(prod);
      SpatialField reference(img.n());
      for (size_t i = 0; i < sp.size(); ++i) reference.values()[i] = sp[i].real() * img.n();
      total += ssim(optical_convolve(img, kernel, base, rng), reference, scfg);
    }
    double gap = std::abs(total / images.size() - target_ssim);
    if (gap < best_gap) {
      best_gap = gap;
      best_sigma = sigma;
    }
  }
  return best_sigma;
}

}  // namespace f4corr
