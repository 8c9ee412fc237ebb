#include "f4corr/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace f4corr {

namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan backward;
};

// Plans are created once per grid size with FFTW_ESTIMATE | FFTW_UNALIGNED:
// ESTIMATE keeps the chosen algorithm stable across runs (bit-identical
// outputs for identical inputs), UNALIGNED lets us execute on plain
// std::vector storage via fftw_execute_dft.
const PlanPair& plans_for(int n) {
  static std::mutex mu;
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> tmp(static_cast<size_t>(n) * n);
  auto* buf = reinterpret_cast<fftw_complex*>(tmp.data());
  PlanPair p;
  p.forward = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.backward = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  return cache.emplace(n, p).first->second;
}

// Move the DC bin from (0,0) to (n/2, n/2); self-inverse for even n.
std::vector<std::complex<double>> shift_center(const std::vector<std::complex<double>>& in,
                                               int n) {
  std::vector<std::complex<double>> out(in.size());
  int s = n / 2;
  for (int i = 0; i < n; ++i) {
    int si = (i + s) % n;
    for (int j = 0; j < n; ++j) {
      out[static_cast<size_t>(si) * n + ((j + s) % n)] = in[static_cast<size_t>(i) * n + j];
    }
  }
  return out;
}

}  // namespace

std::vector<std::complex<double>> dft2_centered_complex(
    const std::vector<std::complex<double>>& grid, int n) {
  std::vector<std::complex<double>> work = grid;
  auto* buf = reinterpret_cast<fftw_complex*>(work.data());
  fftw_execute_dft(plans_for(n).forward, buf, buf);
  double scale = 1.0 / n;
  for (auto& v : work) v *= scale;
  return shift_center(work, n);
}

FrequencyField dft2_centered(const SpatialField& field) {
  if (!field.finite()) throw InvalidFieldError("non-finite spatial field");
  int n = field.n();
  std::vector<std::complex<double>> grid(field.size());
  for (size_t i = 0; i < grid.size(); ++i) grid[i] = field.values()[i];
  return FrequencyField(n, dft2_centered_complex(grid, n));
}

std::vector<std::complex<double>> idft2_centered(const FrequencyField& freq) {
  if (!freq.finite()) throw InvalidFieldError("non-finite frequency field");
  int n = freq.n();
  std::vector<std::complex<double>> work = shift_center(freq.values(), n);
  auto* buf = reinterpret_cast<fftw_complex*>(work.data());
  fftw_execute_dft(plans_for(n).backward, buf, buf);
  double scale = 1.0 / n;
  for (auto& v : work) v *= scale;
  return work;
}

}  // namespace f4corr
