#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "f4corr/field.hpp"
#include "f4corr/optics.hpp"
#include "f4corr/rng.hpp"

namespace f4corr {

/// Learnable state: K spatial kernels (n x n), fully connected weights
/// (C rows of K*(n/2)^2) and bias (C).
struct ModelParams {
  int n = 28;
  int K = 8;
  int C = 10;
  std::vector<std::vector<double>> kernels;  // K grids, each n*n row-major
  std::vector<double> fc_weights;            // C x P row-major, P = K*(n/2)^2
  std::vector<double> fc_bias;               // C

  int pooled_side() const { return n / 2; }
  int pooled_per_kernel() const { return pooled_side() * pooled_side(); }
  int flat_features() const { return K * pooled_per_kernel(); }
  void validate() const;
};

struct Hyperparams {
  double learning_rate = 0.001;
  int K = 8;
  int pool = 2;
  int classes = 10;
  int epochs = 30;
  int batch_size = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

/// Per-sample activations of one forward pass.
struct ForwardTrace {
  std::vector<std::vector<double>> conv_out;  // K x n*n  (z_hw)
  std::vector<std::vector<double>> act;       // K x n*n  (h)
  std::vector<std::vector<double>> pooled;    // K x (n/2)^2
  std::vector<std::vector<int>> pool_argmax;  // flat index into act, per pooled cell
  std::vector<double> logits;                 // C
  std::vector<double> probs;                  // C
};

/// Convolution backend contract: (image, spatial kernel) -> output field.
using ConvBackend = std::function<SpatialField(const SpatialField&, const SpatialField&)>;

ConvBackend make_software_backend();
ConvBackend make_oracle_backend();
/// Device-backed convolutions; the stream is owned by the caller's run.
ConvBackend make_device_backend(const DeviceConfig& cfg, std::shared_ptr<RngStream> rng);

/// FFT-route circular convolution; matches reference_convolve to 1e-9.
SpatialField software_fft_convolve(const SpatialField& image, const SpatialField& kernel);

/// Per-kernel centered spectra, recomputed after every parameter update
/// before the next device invocation (the SLM2 upload step).
std::vector<FrequencyField> kernel_to_frequency(const ModelParams& params);

ForwardTrace forward(const ModelParams& params, const SpatialField& image,
                     const ConvBackend& backend, const Hyperparams& hp);

/// Softmax cross-entropy: loss = -log p[label], e = p - onehot(label).
std::pair<double, std::vector<double>> loss_and_error(const ForwardTrace& trace, int label);

ModelParams init_params(int n, int K, int C, RngStream& rng);

struct UpdateSet {
  std::vector<std::vector<double>> d_kernels;  // K x n*n
  std::vector<double> d_fc;                    // C x P
  std::vector<double> d_bias;                  // C
};

UpdateSet zero_updates(const ModelParams& params);

/// Adam first/second moment estimates, one slot per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> m_kernels, v_kernels;
  std::vector<double> m_fc, v_fc, m_bias, v_bias;
  long step = 0;

  static AdamState zeros_like(const ModelParams& params);
};

/// W' = W - eta * Adam(dW), standard bias-corrected Adam.
void adam_step(ModelParams& params, AdamState& state, const UpdateSet& updates,
               const Hyperparams& hp);

/// Checkpoint: binary field layout per kernel, then fc tensors, preceded
/// by a one-line JSON manifest (K, n, C, seed, epoch).
void save_checkpoint(const std::string& path, const ModelParams& params, uint64_t seed, int epoch);
ModelParams load_checkpoint(const std::string& path);

}  // namespace f4corr
