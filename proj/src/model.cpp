#include "f4corr/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "f4corr/fft.hpp"

#include <nlohmann/json.hpp>

namespace f4corr {

void ModelParams::validate() const {
  if (n < 2 || n % 2 != 0) throw ConfigError("model n must be even and >= 2");
  if (K < 0 || C < 1) throw ConfigError("model K must be >= 0, C >= 1");
  if (static_cast<int>(kernels.size()) != K) throw ShapeError("kernel count mismatch");
  for (const auto& k : kernels) {
    if (static_cast<int>(k.size()) != n * n) throw ShapeError("kernel size mismatch");
    for (double v : k) {
      if (!std::isfinite(v)) throw InvalidFieldError("non-finite kernel entry");
    }
  }
  if (static_cast<int>(fc_weights.size()) != C * flat_features()) {
    throw ShapeError("fc weight shape mismatch");
  }
  if (static_cast<int>(fc_bias.size()) != C) throw ShapeError("fc bias shape mismatch");
}

void Hyperparams::validate() const {
  if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  if (pool != 2) throw ConfigError("only 2x2 pooling is supported");
  if (epochs < 0 || batch_size < 1) throw ConfigError("bad epochs/batch_size");
}

ConvBackend make_software_backend() {
  return [](const SpatialField& image, const SpatialField& kernel) {
    return software_fft_convolve(image, kernel);
  };
}

ConvBackend make_oracle_backend() {
  return [](const SpatialField& image, const SpatialField& kernel) {
    return reference_convolve(image, kernel);
  };
}

ConvBackend make_device_backend(const DeviceConfig& cfg, std::shared_ptr<RngStream> rng) {
  cfg.validate();
  return [cfg, rng](const SpatialField& image, const SpatialField& kernel) {
    return optical_convolve(image, kernel, cfg, *rng);
  };
}

SpatialField software_fft_convolve(const SpatialField& image, const SpatialField& kernel) {
  if (image.n() != kernel.n()) throw ShapeError("image/kernel size mismatch");
  int n = image.n();
  FrequencyField fi = dft2_centered(image);
  FrequencyField fk = dft2_centered(kernel);
  FrequencyField prod(n);
  for (size_t i = 0; i < prod.size(); ++i) prod.values()[i] = fi.values()[i] * fk.values()[i];
  auto spatial = idft2_centered(prod);
  SpatialField out(n);
  // Same 1/n fold-back as the device path.
  for (size_t i = 0; i < spatial.size(); ++i) out.values()[i] = spatial[i].real() * n;
  return out;
}

std::vector<FrequencyField> kernel_to_frequency(const ModelParams& params) {
  params.validate();
  std::vector<FrequencyField> out;
  out.reserve(params.K);
  for (const auto& k : params.kernels) {
    out.push_back(dft2_centered(SpatialField(params.n, k)));
  }
  return out;
}

ForwardTrace forward(const ModelParams& params, const SpatialField& image,
                     const ConvBackend& backend, const Hyperparams& hp) {
  params.validate();
  if (image.n() != params.n) throw ShapeError("image size mismatch");
  int n = params.n;
  int half = n / 2;

  ForwardTrace trace;
  trace.conv_out.resize(params.K);
  trace.act.resize(params.K);
  trace.pooled.resize(params.K);
  trace.pool_argmax.resize(params.K);

  for (int k = 0; k < params.K; ++k) {
    SpatialField z = backend(image, SpatialField(n, params.kernels[k]));
    if (z.n() != n) throw ShapeError("backend returned wrong size");
    trace.conv_out[k] = z.values();
    trace.act[k].resize(z.size());
    for (size_t i = 0; i < z.size(); ++i) trace.act[k][i] = std::max(0.0, z.values()[i]);

    trace.pooled[k].resize(static_cast<size_t>(half) * half);
    trace.pool_argmax[k].resize(trace.pooled[k].size());
    for (int i = 0; i < half; ++i) {
      for (int j = 0; j < half; ++j) {
        // First (row-major) maximal element wins ties.
        int best = (2 * i) * n + 2 * j;
        double best_v = trace.act[k][best];
        for (int di = 0; di < 2; ++di) {
          for (int dj = 0; dj < 2; ++dj) {
            int idx = (2 * i + di) * n + 2 * j + dj;
            if (trace.act[k][idx] > best_v) {
              best_v = trace.act[k][idx];
              best = idx;
            }
          }
        }
        trace.pooled[k][static_cast<size_t>(i) * half + j] = best_v;
        trace.pool_argmax[k][static_cast<size_t>(i) * half + j] = best;
      }
    }
  }

  int P = params.flat_features();
  int per = params.pooled_per_kernel();
  trace.logits.assign(params.C, 0.0);
  for (int c = 0; c < params.C; ++c) {
    double acc = params.fc_bias[c];
    const double* row = params.fc_weights.data() + static_cast<size_t>(c) * P;
    for (int k = 0; k < params.K; ++k) {
      const double* p = trace.pooled[k].data();
      const double* w = row + static_cast<size_t>(k) * per;
      for (int i = 0; i < per; ++i) acc += w[i] * p[i];
    }
    trace.logits[c] = acc;
  }

  double max_logit = *std::max_element(trace.logits.begin(), trace.logits.end());
  trace.probs.resize(params.C);
  double sum = 0.0;
  for (int c = 0; c < params.C; ++c) {
    trace.probs[c] = std::exp(trace.logits[c] - max_logit);
    sum += trace.probs[c];
  }
  for (double& p : trace.probs) p /= sum;
  return trace;
}

std::pair<double, std::vector<double>> loss_and_error(const ForwardTrace& trace, int label) {
  int C = static_cast<int>(trace.probs.size());
  if (label < 0 || label >= C) throw DomainError("label out of range");
  double loss = -std::log(std::max(trace.probs[label], 1e-300));
  std::vector<double> e = trace.probs;
  e[label] -= 1.0;
  return {loss, std::move(e)};
}

ModelParams init_params(int n, int K, int C, RngStream& rng) {
  ModelParams p;
  p.n = n;
  p.K = K;
  p.C = C;
  p.kernels.assign(K, std::vector<double>(static_cast<size_t>(n) * n));
  double kb = 1.0 / n;
  for (auto& kernel : p.kernels) {
    for (double& v : kernel) v = rng.uniform(-kb, kb);
  }
  int P = p.flat_features();
  double wb = 1.0 / std::sqrt(static_cast<double>(P));
  p.fc_weights.resize(static_cast<size_t>(C) * P);
  for (double& v : p.fc_weights) v = rng.uniform(-wb, wb);
  p.fc_bias.assign(C, 0.0);
  return p;
}

UpdateSet zero_updates(const ModelParams& params) {
  UpdateSet u;
  u.d_kernels.assign(params.K, std::vector<double>(static_cast<size_t>(params.n) * params.n, 0.0));
  u.d_fc.assign(params.fc_weights.size(), 0.0);
  u.d_bias.assign(params.fc_bias.size(), 0.0);
  return u;
}

AdamState AdamState::zeros_like(const ModelParams& params) {
  AdamState s;
  s.m_kernels.assign(params.K,
                     std::vector<double>(static_cast<size_t>(params.n) * params.n, 0.0));
  s.v_kernels = s.m_kernels;
  s.m_fc.assign(params.fc_weights.size(), 0.0);
  s.v_fc = s.m_fc;
  s.m_bias.assign(params.fc_bias.size(), 0.0);
  s.v_bias = s.m_bias;
  return s;
}

namespace {
void adam_apply(std::vector<double>& w, std::vector<double>& m, std::vector<double>& v,
                const std::vector<double>& g, const Hyperparams& hp, double bc1, double bc2) {
  if (w.size() != g.size()) throw ShapeError("adam update shape mismatch");
  for (size_t i = 0; i < w.size(); ++i) {
    m[i] = hp.adam_beta1 * m[i] + (1.0 - hp.adam_beta1) * g[i];
    v[i] = hp.adam_beta2 * v[i] + (1.0 - hp.adam_beta2) * g[i] * g[i];
    double mhat = m[i] / bc1;
    double vhat = v[i] / bc2;
    w[i] -= hp.learning_rate * mhat / (std::sqrt(vhat) + hp.adam_eps);
  }
}
}  // namespace

void adam_step(ModelParams& params, AdamState& state, const UpdateSet& updates,
               const Hyperparams& hp) {
  hp.validate();
  if (static_cast<int>(updates.d_kernels.size()) != params.K) {
    throw ShapeError("update kernel count mismatch");
  }
  ++state.step;
  double bc1 = 1.0 - std::pow(hp.adam_beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(hp.adam_beta2, static_cast<double>(state.step));
  for (int k = 0; k < params.K; ++k) {
    adam_apply(params.kernels[k], state.m_kernels[k], state.v_kernels[k], updates.d_kernels[k],
               hp, bc1, bc2);
  }
  adam_apply(params.fc_weights, state.m_fc, state.v_fc, updates.d_fc, hp, bc1, bc2);
  adam_apply(params.fc_bias, state.m_bias, state.v_bias, updates.d_bias, hp, bc1, bc2);
}

void save_checkpoint(const std::string& path, const ModelParams& params, uint64_t seed,
                     int epoch) {
  params.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  nlohmann::json manifest = {
      {"K", params.K}, {"n", params.n}, {"C", params.C}, {"seed", seed}, {"epoch", epoch}};
  out << manifest.dump() << '\n';
  for (const auto& k : params.kernels) write_field(out, SpatialField(params.n, k));
  // FC tensors reuse the flat field payload convention: raw LE f64.
  auto write_vec = [&out](const std::vector<double>& v) {
    for (double x : v) {
      out.write(reinterpret_cast<const char*>(&x), sizeof x);
    }
  };
  write_vec(params.fc_weights);
  write_vec(params.fc_bias);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string line;
  std::getline(in, line);
  nlohmann::json manifest = nlohmann::json::parse(line);
  ModelParams p;
  p.K = manifest.at("K").get<int>();
  p.n = manifest.at("n").get<int>();
  p.C = manifest.at("C").get<int>();
  p.kernels.reserve(p.K);
  for (int k = 0; k < p.K; ++k) p.kernels.push_back(read_spatial_field(in).values());
  auto read_vec = [&in, &path](size_t count) {
    std::vector<double> v(count);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw FormatError("truncated checkpoint: " + path);
    return v;
  };
  p.fc_weights = read_vec(static_cast<size_t>(p.C) * p.flat_features());
  p.fc_bias = read_vec(static_cast<size_t>(p.C));
  p.validate();
  return p;
}

}  // namespace f4corr
