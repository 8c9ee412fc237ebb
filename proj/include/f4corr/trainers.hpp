#pragma once

#include <cstdint>
#include <vector>

#include "f4corr/dataset.hpp"
#include "f4corr/model.hpp"

namespace f4corr {

/// PEPITA's fixed random error-projection operator: maps the class error
/// vector into input space. Immutable once initialized.
struct ProjectionF {
  int n = 0;
  int C = 0;
  double scale = 0.05;
  std::vector<double> matrix;  // n*n rows of C, row-major

  uint64_t checksum() const;  // FNV-1a over the raw entries
};

enum class Algorithm { bp, pepita, mempepita };
enum class PepitaConvRule { pointwise, correlation };
enum class ModulationSign { minus, plus };

struct AlgoConfig {
  Algorithm algorithm = Algorithm::bp;
  PepitaConvRule pepita_conv_rule = PepitaConvRule::pointwise;
  double f_scale = 0.05;
  ModulationSign modulation_sign = ModulationSign::minus;
};

/// Multiply-add counters per training phase. Convention: one multiply-add
/// = 2 flops; one 2-D FFT = 5*n^2*log2(n) real flops.
struct FlopLedger {
  uint64_t forward_flops = 0;
  uint64_t update_flops = 0;
  uint64_t fft_flops = 0;
  uint64_t pointwise_flops = 0;
  uint64_t passes = 0;
  uint64_t peak_activation_memory = 0;  // bytes

  void note_peak_memory(uint64_t bytes);
};

uint64_t fft2_flops(int n);                      // 5*n^2*log2(n)
uint64_t forward_pass_flops(int n, int K, int C);
uint64_t trace_bytes(int n, int K, int C);

ProjectionF init_projection(int n, int C, double f_scale, RngStream& rng);

/// x_mod = clamp[0,1](x -/+ F*e), reshaped to n x n.
SpatialField modulated_input(const SpatialField& image, const std::vector<double>& e,
                             const ProjectionF& F, ModulationSign sign);

/// Forward-only update from the standard trace plus one modulated pass
/// through the same backend.
UpdateSet pepita_update(const ModelParams& params, const SpatialField& image,
                        const ForwardTrace& trace, const std::vector<double>& e,
                        const ProjectionF& F, const ConvBackend& backend, const AlgoConfig& cfg,
                        const Hyperparams& hp, FlopLedger& ledger);

/// Same mathematics as pepita_update but re-computes the standard pass
/// instead of retaining it: three passes, lower peak activation memory.
UpdateSet mempepita_update(const ModelParams& params, const SpatialField& image,
                           const ForwardTrace& trace, const std::vector<double>& e,
                           const ProjectionF& F, const ConvBackend& backend,
                           const AlgoConfig& cfg, const Hyperparams& hp, FlopLedger& ledger);

/// Backpropagation through the differentiable software convolution model,
/// evaluated on the trace the (possibly physical) backend produced.
UpdateSet bp_update(const ModelParams& params, const SpatialField& image,
                    const ForwardTrace& trace, const std::vector<double>& e,
                    const AlgoConfig& cfg, FlopLedger& ledger);

struct EpochMetrics {
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
};

EpochMetrics train_epoch(ModelParams& params, AdamState& adam,
                         const std::vector<LabeledImage>& data, const AlgoConfig& algo,
                         const ConvBackend& backend, const Hyperparams& hp,
                         const ProjectionF& F, RngStream& rng, FlopLedger& ledger);

double evaluate(const ModelParams& params, const std::vector<LabeledImage>& data,
                const ConvBackend& backend, const Hyperparams& hp);

/// Closed-form per-sample update-rule counts (no execution), matching the
/// convention that downstream dL/dz_hw terms are excluded for BP.
FlopLedger count_flops(const AlgoConfig& algo, int n, int K, int C);

}  // namespace f4corr
