#pragma once

#include <utility>
#include <vector>

#include "f4corr/fft.hpp"
#include "f4corr/field.hpp"
#include "f4corr/rng.hpp"

namespace f4corr {

/// One spatial light modulator: uniform mid-tread quantizer over
/// value_range with 2^bit_depth levels. quantize=false passes through.
struct SlmConfig {
  int bit_depth = 8;
  bool quantize = false;
  double range_min = 0.0;
  double range_max = 1.0;

  void validate() const;
};

enum class CameraReadout { ideal_real, magnitude, intensity };

struct CameraConfig {
  CameraReadout readout = CameraReadout::ideal_real;
  double noise_sigma = 0.0;  // additive Gaussian, output-amplitude units
  int bit_depth = 0;         // ADC levels = 2^bit_depth; 0 disables
  double exposure_ms = 20.0;
  double saturation = 4.0;

  void validate() const;
};

/// The whole simulated correlator: two SLMs, camera, sub-pixel
/// misalignment (applied as a linear phase ramp in the Fourier plane)
/// and the timing parameters of the physical device.
struct DeviceConfig {
  SlmConfig slm1;
  SlmConfig slm2;
  CameraConfig camera;
  double misalign_dx = 0.0;  // pixels, |dx| <= 2
  double misalign_dy = 0.0;
  double slm_setup_ms = 25.0;
  bool per_kernel_passes = true;

  void validate() const;
};

/// Everything off: the device computes the exact circular convolution.
DeviceConfig transparent_device();

/// 8-bit SLMs, 8-bit ADC, noise calibrated so the device-vs-software
/// SSIM study lands near the hardware's reported fidelity.
DeviceConfig paper_like_device();

/// Clamp to [range_min, range_max], then round to the nearest of
/// 2^bit_depth uniform levels; ties round toward +inf.
std::vector<double> quantize(const std::vector<double>& values, const SlmConfig& cfg);

/// SLM1: amplitude-encode an image with values in [0,1].
SpatialField encode_input(const SpatialField& image, const SlmConfig& cfg);

/// SLM2: element-wise complex product. When quantizing, the kernel's real
/// and imaginary parts are quantized independently over their own ranges.
FrequencyField apply_kernel(const FrequencyField& freq, const FrequencyField& kernel_freq,
                            const SlmConfig& cfg);

/// Camera: readout map, additive noise, clamp, ADC quantization.
SpatialField capture(const std::vector<std::complex<double>>& field, int n,
                     const CameraConfig& cfg, RngStream& rng);

/// Full device forward path; with transparent_device() this is exactly
/// the circular convolution of image and kernel.
SpatialField optical_convolve(const SpatialField& image, const SpatialField& kernel_spatial,
                              const DeviceConfig& cfg, RngStream& rng);

/// Direct O(n^4) circular convolution sum; the ground-truth oracle.
SpatialField reference_convolve(const SpatialField& image, const SpatialField& kernel);

/// Sweep noise_sigma over a grid and return the value whose mean SSIM
/// (device vs software convolution over the given images) is closest to
/// target. Used offline to pin the paper-like preset.
double calibrate_noise_sigma(const std::vector<SpatialField>& images, const SpatialField& kernel,
                             DeviceConfig base, const std::vector<double>& sigma_grid,
                             double target_ssim, uint64_t seed);

}  // namespace f4corr
