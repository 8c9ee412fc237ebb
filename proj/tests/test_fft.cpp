#include <doctest.h>

#include <cmath>

#include "f4corr/fft.hpp"
#include "f4corr/rng.hpp"

using namespace f4corr;

namespace {
SpatialField random_field(int n, uint64_t seed, double lo = -1.0, double hi = 1.0) {
  RngStream rng(seed);
  SpatialField f(n);
  for (double& v : f.values()) v = rng.uniform(lo, hi);
  return f;
}
}  // namespace

TEST_CASE("constant image transforms to a single centered DC bin") {
  const double c = 0.37;
  SpatialField f(8, c);
  FrequencyField F = dft2_centered(f);
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      if (u == 4 && v == 4) {
        CHECK(F.at(u, v).real() == doctest::Approx(8.0 * c).epsilon(1e-12));
        CHECK(F.at(u, v).imag() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
      } else {
        CHECK(std::abs(F.at(u, v)) < 1e-12);
      }
    }
  }
}

TEST_CASE("impulse at the grid center has a flat spectrum") {
  SpatialField f(8);
  f.at(4, 4) = 1.0;
  FrequencyField F = dft2_centered(f);
  for (const auto& v : F.values()) CHECK(std::abs(v) == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("Parseval: energy preserved by the centered unitary DFT") {
  SpatialField f = random_field(8, 11);
  FrequencyField F = dft2_centered(f);
  // independent direct summation on both sides
  double e_spatial = 0.0;
  for (double v : f.values()) e_spatial += v * v;
  double e_freq = 0.0;
  for (const auto& v : F.values()) e_freq += std::norm(v);
  CHECK(std::abs(e_freq - e_spatial) / e_spatial < 1e-10);
}

TEST_CASE("round trip is the identity for several sizes") {
  for (int n : {4, 8, 16, 28}) {
    CAPTURE(n);
    SpatialField f = random_field(n, 100 + n);
    auto back = idft2_centered(dft2_centered(f));
    double num = 0, den = 0;
    for (size_t i = 0; i < back.size(); ++i) {
      num += std::norm(back[i] - std::complex<double>(f.values()[i]));
      den += f.values()[i] * f.values()[i];
    }
    CHECK(std::sqrt(num / den) < 1e-10);
  }
}

TEST_CASE("all-zero spectrum inverts to all zeros") {
  FrequencyField F(8);
  auto g = idft2_centered(F);
  for (const auto& v : g) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("single DC bin of value 8 inverts to the constant 1 grid") {
  FrequencyField F(8);
  F.at(4, 4) = 8.0;
  auto g = idft2_centered(F);
  for (const auto& v : g) {
    CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(v.imag()) < 1e-12);
  }
}

TEST_CASE("non-finite input is rejected") {
  SpatialField f(4);
  f.at(0, 0) = std::nan("");
  CHECK_THROWS_AS(dft2_centered(f), InvalidFieldError);

  FrequencyField F(4);
  F.at(1, 1) = {std::numeric_limits<double>::infinity(), 0.0};
  CHECK_THROWS_AS(idft2_centered(F), InvalidFieldError);
}
