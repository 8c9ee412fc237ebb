#include "f4corr/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "f4corr/fft.hpp"

namespace f4corr {

uint64_t ProjectionF::checksum() const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t bits) {
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (double v : matrix) {
    uint64_t bits;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, sizeof bits);
    mix(bits);
  }
  return h;
}

void FlopLedger::note_peak_memory(uint64_t bytes) {
  peak_activation_memory = std::max(peak_activation_memory, bytes);
}

uint64_t fft2_flops(int n) {
  return static_cast<uint64_t>(std::llround(5.0 * n * n * std::log2(static_cast<double>(n))));
}

uint64_t forward_pass_flops(int n, int K, int C) {
  uint64_t n2 = static_cast<uint64_t>(n) * n;
  uint64_t conv = static_cast<uint64_t>(K) * (3 * fft2_flops(n) + 6 * n2);  // 2 fwd + 1 inv FFT, complex pointwise
  uint64_t act_pool = static_cast<uint64_t>(K) * (n2 + n2);
  uint64_t P = static_cast<uint64_t>(K) * (n2 / 4);
  uint64_t fc = 2 * static_cast<uint64_t>(C) * P + C;
  return conv + act_pool + fc + 3 * static_cast<uint64_t>(C);
}

uint64_t trace_bytes(int n, int K, int C) {
  uint64_t n2 = static_cast<uint64_t>(n) * n;
  // conv_out + act + pooled (doubles) + logits/probs
  return 8 * (static_cast<uint64_t>(K) * (n2 + n2 + n2 / 4) + 2 * static_cast<uint64_t>(C));
}

ProjectionF init_projection(int n, int C, double f_scale, RngStream& rng) {
  if (n < 1 || C < 1) throw DomainError("projection needs positive n, C");
  ProjectionF F;
  F.n = n;
  F.C = C;
  F.scale = f_scale;
  F.matrix.resize(static_cast<size_t>(n) * n * C);
  double bound = f_scale / n;  // f_scale / sqrt(n^2)
  for (double& v : F.matrix) v = rng.uniform(-bound, bound);
  return F;
}

SpatialField modulated_input(const SpatialField& image, const std::vector<double>& e,
                             const ProjectionF& F, ModulationSign sign) {
  int n = image.n();
  if (F.n != n || F.C != static_cast<int>(e.size())) throw ShapeError("projection shape mismatch");
  SpatialField out(n);
  double s = sign == ModulationSign::minus ? -1.0 : 1.0;
  for (size_t i = 0; i < out.size(); ++i) {
    const double* row = F.matrix.data() + i * F.C;
    double proj = 0.0;
    for (int c = 0; c < F.C; ++c) proj += row[c] * e[c];
    out.values()[i] = std::clamp(image.values()[i] + s * proj, 0.0, 1.0);
  }
  return out;
}

namespace {

// ΔW_fc = e · flatten(pooled)ᵀ, Δbias = e.
void fill_fc_update(UpdateSet& u, const ModelParams& params, const std::vector<double>& e,
                    const std::vector<std::vector<double>>& pooled) {
  int P = params.flat_features();
  int per = params.pooled_per_kernel();
  for (int c = 0; c < params.C; ++c) {
    double* row = u.d_fc.data() + static_cast<size_t>(c) * P;
    for (int k = 0; k < params.K; ++k) {
      const double* p = pooled[k].data();
      for (int i = 0; i < per; ++i) row[static_cast<size_t>(k) * per + i] = e[c] * p[i];
    }
    u.d_bias[c] = e[c];
  }
}

// Circular cross-correlation corr[d] = sum_x a[x] * b[x + d], via transforms.
std::vector<double> cross_correlate(const SpatialField& a, const std::vector<double>& b, int n) {
  FrequencyField fa = dft2_centered(a);
  FrequencyField fb = dft2_centered(SpatialField(n, b));
  FrequencyField prod(n);
  for (size_t i = 0; i < prod.size(); ++i) {
    prod.values()[i] = std::conj(fa.values()[i]) * fb.values()[i];
  }
  auto spatial = idft2_centered(prod);
  std::vector<double> out(spatial.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = spatial[i].real() * n;
  return out;
}

uint64_t pepita_conv_update_flops(const AlgoConfig& cfg, int n, int K) {
  uint64_t n2 = static_cast<uint64_t>(n) * n;
  if (cfg.pepita_conv_rule == PepitaConvRule::pointwise) {
    return static_cast<uint64_t>(K) * 3 * n2;  // diff + product + modulated-input term
  }
  return static_cast<uint64_t>(K) * (3 * fft2_flops(n) + 2 * n2);
}

uint64_t fc_update_flops(int n, int K, int C) {
  uint64_t P = static_cast<uint64_t>(K) * (static_cast<uint64_t>(n) * n / 4);
  return 2 * static_cast<uint64_t>(C) * P + static_cast<uint64_t>(C);
}

UpdateSet pepita_core(const ModelParams& params, const SpatialField& image,
                      const std::vector<std::vector<double>>& act_standard,
                      const std::vector<double>& e, const ProjectionF& F,
                      const ConvBackend& backend, const AlgoConfig& cfg, const Hyperparams& hp,
                      FlopLedger& ledger) {
  SpatialField x_mod = modulated_input(image, e, F, cfg.modulation_sign);
  ForwardTrace trace_mod = forward(params, x_mod, backend, hp);

  UpdateSet u = zero_updates(params);
  int n = params.n;
  for (int k = 0; k < params.K; ++k) {
    std::vector<double> diff(act_standard[k].size());
    for (size_t i = 0; i < diff.size(); ++i) diff[i] = act_standard[k][i] - trace_mod.act[k][i];
    if (cfg.pepita_conv_rule == PepitaConvRule::pointwise) {
      for (size_t i = 0; i < diff.size(); ++i) u.d_kernels[k][i] = diff[i] * x_mod.values()[i];
    } else {
      u.d_kernels[k] = cross_correlate(x_mod, diff, n);
    }
  }
  fill_fc_update(u, params, e, trace_mod.pooled);

  ledger.update_flops += pepita_conv_update_flops(cfg, n, params.K) +
                         fc_update_flops(n, params.K, params.C);
  ledger.pointwise_flops += static_cast<uint64_t>(params.K) * n * n;
  return u;
}

}  // namespace

UpdateSet pepita_update(const ModelParams& params, const SpatialField& image,
                        const ForwardTrace& trace, const std::vector<double>& e,
                        const ProjectionF& F, const ConvBackend& backend, const AlgoConfig& cfg,
                        const Hyperparams& hp, FlopLedger& ledger) {
  // Standard-pass activations are retained, so two full traces coexist.
  ledger.passes += 2;
  ledger.forward_flops += 2 * forward_pass_flops(params.n, params.K, params.C);
  ledger.note_peak_memory(2 * trace_bytes(params.n, params.K, params.C));
  return pepita_core(params, image, trace.act, e, F, backend, cfg, hp, ledger);
}

UpdateSet mempepita_update(const ModelParams& params, const SpatialField& image,
                           const ForwardTrace& /*trace*/, const std::vector<double>& e,
                           const ProjectionF& F, const ConvBackend& backend,
                           const AlgoConfig& cfg, const Hyperparams& hp, FlopLedger& ledger) {
  // The standard pass was not stored; re-run it (third pass overall) and
  // keep only the activation buffer alongside the modulated trace.
  ForwardTrace recomputed = forward(params, image, backend, hp);
  ledger.passes += 3;
  ledger.forward_flops += 3 * forward_pass_flops(params.n, params.K, params.C);
  ledger.note_peak_memory(trace_bytes(params.n, params.K, params.C) +
                          8ull * params.K * params.n * params.n);
  return pepita_core(params, image, recomputed.act, e, F, backend, cfg, hp, ledger);
}

UpdateSet bp_update(const ModelParams& params, const SpatialField& image,
                    const ForwardTrace& trace, const std::vector<double>& e,
                    const AlgoConfig& /*cfg*/, FlopLedger& ledger) {
  params.validate();
  if (static_cast<int>(e.size()) != params.C) throw ShapeError("error vector size mismatch");
  int n = params.n;
  int per = params.pooled_per_kernel();
  int P = params.flat_features();

  UpdateSet u = zero_updates(params);
  fill_fc_update(u, params, e, trace.pooled);

  FrequencyField image_freq = dft2_centered(image);
  for (int k = 0; k < params.K; ++k) {
    // delta through FC, unpool, ReLU gate.
    std::vector<double> delta_z(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < per; ++i) {
      double g = 0.0;
      for (int c = 0; c < params.C; ++c) {
        g += params.fc_weights[static_cast<size_t>(c) * P + static_cast<size_t>(k) * per + i] *
             e[c];
      }
      int src = trace.pool_argmax[k][i];
      if (trace.conv_out[k][src] > 0.0) delta_z[src] += g;
    }
    // ΔW_k = cross-correlation of the input with delta_z, via the
    // software transform model.
    FrequencyField fd = dft2_centered(SpatialField(n, delta_z));
    FrequencyField prod(n);
    for (size_t i = 0; i < prod.size(); ++i) {
      prod.values()[i] = std::conj(image_freq.values()[i]) * fd.values()[i];
    }
    auto spatial = idft2_centered(prod);
    for (size_t i = 0; i < spatial.size(); ++i) u.d_kernels[k][i] = spatial[i].real() * n;
  }

  uint64_t n2 = static_cast<uint64_t>(n) * n;
  uint64_t conv_grad = static_cast<uint64_t>(params.K) * (3 * fft2_flops(n) + 2 * n2);
  ledger.passes += 1;
  ledger.forward_flops += forward_pass_flops(n, params.K, params.C);
  ledger.update_flops += conv_grad + fc_update_flops(n, params.K, params.C);
  ledger.fft_flops += static_cast<uint64_t>(params.K) * 3 * fft2_flops(n);
  ledger.pointwise_flops += static_cast<uint64_t>(params.K) * 2 * n2;
  ledger.note_peak_memory(trace_bytes(n, params.K, params.C));
  return u;
}

EpochMetrics train_epoch(ModelParams& params, AdamState& adam,
                         const std::vector<LabeledImage>& data, const AlgoConfig& algo,
                         const ConvBackend& backend, const Hyperparams& hp,
                         const ProjectionF& F, RngStream& rng, FlopLedger& ledger) {
  if (data.empty()) throw ConfigError("train_epoch: empty dataset");
  hp.validate();

  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), size_t{0});
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.next_below(i)]);
  }

  double loss_sum = 0.0;
  size_t correct = 0;
  for (size_t idx : order) {
    const LabeledImage& sample = data[idx];
    ForwardTrace trace = forward(params, sample.pixels, backend, hp);
    auto [loss, e] = loss_and_error(trace, sample.label);
    if (!std::isfinite(loss)) throw DomainError("non-finite training loss");
    loss_sum += loss;
    int pred = static_cast<int>(std::max_element(trace.probs.begin(), trace.probs.end()) -
                                trace.probs.begin());
    if (pred == sample.label) ++correct;

    UpdateSet u;
    switch (algo.algorithm) {
      case Algorithm::bp:
        u = bp_update(params, sample.pixels, trace, e, algo, ledger);
        break;
      case Algorithm::pepita:
        u = pepita_update(params, sample.pixels, trace, e, F, backend, algo, hp, ledger);
        break;
      case Algorithm::mempepita:
        u = mempepita_update(params, sample.pixels, trace, e, F, backend, algo, hp, ledger);
        break;
    }
    adam_step(params, adam, u, hp);
    kernel_to_frequency(params);  // SLM2 upload step
  }

  EpochMetrics m;
  m.mean_loss = loss_sum / data.size();
  m.train_accuracy = static_cast<double>(correct) / data.size();
  return m;
}

double evaluate(const ModelParams& params, const std::vector<LabeledImage>& data,
                const ConvBackend& backend, const Hyperparams& hp) {
  if (data.empty()) throw ConfigError("evaluate: empty dataset");
  size_t correct = 0;
  for (const auto& sample : data) {
    ForwardTrace trace = forward(params, sample.pixels, backend, hp);
    // Ties break toward the lowest class index.
    int pred = 0;
    for (int c = 1; c < static_cast<int>(trace.probs.size()); ++c) {
      if (trace.probs[c] > trace.probs[pred]) pred = c;
    }
    if (pred == sample.label) ++correct;
  }
  return static_cast<double>(correct) / data.size();
}

FlopLedger count_flops(const AlgoConfig& algo, int n, int K, int C) {
  if (n < 2) throw DomainError("count_flops: invalid n");
  FlopLedger ledger;
  switch (algo.algorithm) {
    case Algorithm::bp:
      ledger.passes = 1;
      ledger.update_flops = static_cast<uint64_t>(K) *
                                (3 * fft2_flops(n) + 2 * static_cast<uint64_t>(n) * n) +
                            fc_update_flops(n, K, C);
      break;
    case Algorithm::pepita:
      ledger.passes = 2;
      ledger.update_flops = pepita_conv_update_flops(algo, n, K) + fc_update_flops(n, K, C);
      break;
    case Algorithm::mempepita:
      ledger.passes = 3;
      ledger.update_flops = pepita_conv_update_flops(algo, n, K) + fc_update_flops(n, K, C);
      break;
  }
  ledger.forward_flops = ledger.passes * forward_pass_flops(n, K, C);
  return ledger;
}

}  // namespace f4corr
