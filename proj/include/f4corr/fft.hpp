#pragma once

#include <complex>
#include <vector>

#include "f4corr/field.hpp"

namespace f4corr {

/// Unitary 2-D DFT with the DC bin moved to (n/2, n/2). Normalization is
/// 1/n for the whole transform, so energy is preserved exactly (Parseval).
FrequencyField dft2_centered(const SpatialField& field);

/// Centered unitary DFT of an already-complex grid (row-major, length n*n).
std::vector<std::complex<double>> dft2_centered_complex(
    const std::vector<std::complex<double>>& grid, int n);

/// Exact inverse of dft2_centered. Returns the full complex spatial grid;
/// the imaginary part is numerical residue for conjugate-symmetric spectra.
std::vector<std::complex<double>> idft2_centered(const FrequencyField& freq);

}  // namespace f4corr
