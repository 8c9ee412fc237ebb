#include <doctest.h>

#include <cmath>

#include "f4corr/analysis.hpp"
#include "f4corr/optics.hpp"

using namespace f4corr;

namespace {

SpatialField random_field(int n, uint64_t seed, double lo, double hi) {
  RngStream rng(seed);
  SpatialField f(n);
  for (double& v : f.values()) v = rng.uniform(lo, hi);
  return f;
}

}  // namespace

TEST_CASE("quantize=false is the identity") {
  SlmConfig cfg;
  cfg.quantize = false;
  std::vector<double> v = {0.1, 0.5, 0.77, -3.0};
  CHECK(quantize(v, cfg) == v);
}

TEST_CASE("1-bit quantizer rounds the midpoint up") {
  SlmConfig cfg;
  cfg.quantize = true;
  cfg.bit_depth = 1;
  auto out = quantize({0.5}, cfg);
  CHECK(out[0] == 1.0);
}

TEST_CASE("8-bit levels are exactly representable") {
  SlmConfig cfg;
  cfg.quantize = true;
  cfg.bit_depth = 8;
  auto out = quantize({37.0 / 255.0}, cfg);
  CHECK(out[0] == doctest::Approx(37.0 / 255.0).epsilon(1e-15));
  // every level maps to itself
  for (int i = 0; i < 256; ++i) {
    double level = i / 255.0;
    CHECK(quantize({level}, cfg)[0] == doctest::Approx(level).epsilon(1e-14));
  }
}

TEST_CASE("quantizer clamps before rounding") {
  SlmConfig cfg;
  cfg.quantize = true;
  cfg.bit_depth = 8;
  CHECK(quantize({1.7}, cfg)[0] == 1.0);
  CHECK(quantize({-0.3}, cfg)[0] == 0.0);
}

TEST_CASE("encode_input basics") {
  SlmConfig cfg;
  SUBCASE("all-zero image stays zero") {
    SpatialField zero(4);
    CHECK(encode_input(zero, cfg).energy() == 0.0);
  }
  SUBCASE("quantize off is the identity") {
    SpatialField img = random_field(4, 3, 0.0, 1.0);
    CHECK(encode_input(img, cfg).values() == img.values());
  }
  SUBCASE("uniform 0.5 rounds up to 128/255 under 8-bit encoding") {
    cfg.quantize = true;
    SpatialField img(4, 0.5);
    SpatialField enc = encode_input(img, cfg);
    for (double v : enc.values()) CHECK(v == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
  }
  SUBCASE("out-of-range pixel is rejected") {
    SpatialField img(4, 0.5);
    img.at(1, 2) = 1.5;
    CHECK_THROWS_AS(encode_input(img, cfg), RangeError);
  }
}

TEST_CASE("apply_kernel") {
  SlmConfig cfg;
  FrequencyField freq(4);
  RngStream rng(7);
  for (auto& v : freq.values()) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};

  SUBCASE("all-ones kernel is the identity") {
    FrequencyField ones(4);
    for (auto& v : ones.values()) v = 1.0;
    FrequencyField out = apply_kernel(freq, ones, cfg);
    for (size_t i = 0; i < out.size(); ++i) CHECK(out.values()[i] == freq.values()[i]);
  }
  SUBCASE("zero kernel gives a zero spectrum") {
    FrequencyField zeros(4);
    CHECK(apply_kernel(freq, zeros, cfg).energy() == 0.0);
  }
  SUBCASE("matches the scalar-by-scalar product") {
    FrequencyField kernel(4);
    for (auto& v : kernel.values()) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    FrequencyField out = apply_kernel(freq, kernel, cfg);
    for (size_t i = 0; i < out.size(); ++i) {
      std::complex<double> want = freq.values()[i] * kernel.values()[i];
      CHECK(std::abs(out.values()[i] - want) < 1e-15);
    }
  }
  SUBCASE("size mismatch is a shape error") {
    FrequencyField small(6);
    CHECK_THROWS_AS(apply_kernel(freq, small, cfg), ShapeError);
  }
}

TEST_CASE("capture") {
  CameraConfig cfg;
  RngStream rng(9);
  std::vector<std::complex<double>> field(16);
  RngStream gen(5);
  for (auto& v : field) v = {gen.uniform(-1, 1), gen.uniform(-1, 1)};

  SUBCASE("transparent camera returns the exact real part") {
    SpatialField out = capture(field, 4, cfg, rng);
    for (size_t i = 0; i < field.size(); ++i) CHECK(out.values()[i] == field[i].real());
  }
  SUBCASE("all-zero field gives all-zero output in every mode") {
    std::vector<std::complex<double>> zeros(16);
    for (auto mode : {CameraReadout::ideal_real, CameraReadout::magnitude,
                      CameraReadout::intensity}) {
      cfg.readout = mode;
      CHECK(capture(zeros, 4, cfg, rng).energy() == 0.0);
    }
  }
  SUBCASE("identically re-seeded streams reproduce noise bit-exactly") {
    cfg.noise_sigma = 0.1;
    RngStream a(77), b(77);
    SpatialField out_a = capture(field, 4, cfg, a);
    SpatialField out_b = capture(field, 4, cfg, b);
    CHECK(out_a.values() == out_b.values());
  }
}

TEST_CASE("reference_convolve hand-checked cases") {
  SpatialField img(2, std::vector<double>{1, 2, 3, 4});
  SUBCASE("impulse at origin is the identity") {
    SpatialField k(2, std::vector<double>{1, 0, 0, 0});
    CHECK(reference_convolve(img, k).values() == img.values());
  }
  SUBCASE("shifted impulse circularly shifts the image") {
    SpatialField k(2, std::vector<double>{0, 1, 0, 0});
    // out[x][y] = img[x][(y-1) mod 2]: hand-evaluated 16-term sum
    CHECK(reference_convolve(img, k).values() == std::vector<double>{2, 1, 4, 3});
  }
  SUBCASE("size mismatch is a shape error") {
    SpatialField k(4);
    CHECK_THROWS_AS(reference_convolve(img, k), ShapeError);
  }
}

TEST_CASE("optical_convolve with a transparent device") {
  DeviceConfig cfg = transparent_device();
  RngStream rng(1);

  SUBCASE("impulse kernel reproduces the input") {
    SpatialField img = random_field(8, 21, 0.0, 1.0);
    SpatialField k(8);
    k.at(0, 0) = 1.0;
    SpatialField out = optical_convolve(img, k, cfg, rng);
    CHECK(max_abs_diff(out, img) < 1e-10);
  }
  SUBCASE("matches the O(n^4) oracle") {
    for (uint64_t s = 0; s < 10; ++s) {
      SpatialField img = random_field(8, 1000 + s, 0.0, 1.0);
      SpatialField k = random_field(8, 2000 + s, -1.0, 1.0);
      SpatialField got = optical_convolve(img, k, cfg, rng);
      CHECK(relative_l2_error(got, reference_convolve(img, k)) < 1e-6);
    }
  }
  SUBCASE("is linear in the image") {
    SpatialField x = random_field(8, 31, 0.0, 1.0);
    SpatialField y = random_field(8, 32, 0.0, 1.0);
    SpatialField k = random_field(8, 33, -1.0, 1.0);
    double a = 0.4, b = 0.5;
    SpatialField combo(8);
    for (size_t i = 0; i < combo.size(); ++i) {
      combo.values()[i] = a * x.values()[i] + b * y.values()[i];
    }
    SpatialField lhs = optical_convolve(combo, k, cfg, rng);
    SpatialField cx = optical_convolve(x, k, cfg, rng);
    SpatialField cy = optical_convolve(y, k, cfg, rng);
    for (size_t i = 0; i < lhs.size(); ++i) {
      CHECK(lhs.values()[i] ==
            doctest::Approx(a * cx.values()[i] + b * cy.values()[i]).epsilon(0).scale(1).epsilon(1e-8));
    }
  }
  SUBCASE("size mismatch is a shape error") {
    SpatialField img(8), k(4);
    CHECK_THROWS_AS(optical_convolve(img, k, cfg, rng), ShapeError);
  }
}

TEST_CASE("integer misalignment circularly shifts the output") {
  DeviceConfig cfg = transparent_device();
  cfg.misalign_dx = 1.0;
  RngStream rng(2);
  SpatialField img = random_field(8, 41, 0.0, 1.0);
  SpatialField k = random_field(8, 42, -1.0, 1.0);
  SpatialField got = optical_convolve(img, k, cfg, rng);
  SpatialField plain = reference_convolve(img, k);
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 8; ++y) {
      CHECK(got.at(x, y) == doctest::Approx(plain.at((x + 8 - 1) % 8, y)).epsilon(1e-8));
    }
  }
}

TEST_CASE("identical device config and seed give bit-identical outputs") {
  DeviceConfig cfg = paper_like_device();
  SpatialField img = random_field(28, 51, 0.0, 1.0);
  SpatialField k = random_field(28, 52, -0.2, 0.2);
  RngStream a(123), b(123);
  CHECK(optical_convolve(img, k, cfg, a).values() == optical_convolve(img, k, cfg, b).values());
}

TEST_CASE("mean SSIM vs the reference degrades monotonically with noise") {
  DeviceConfig cfg = transparent_device();
  SsimConfig scfg;
  SpatialField k = random_field(28, 61, -0.3, 0.3);
  std::vector<SpatialField> images;
  for (uint64_t s = 0; s < 20; ++s) images.push_back(random_field(28, 70 + s, 0.0, 1.0));

  double prev = 2.0;
  for (double sigma : {0.0, 0.02, 0.05, 0.1, 0.2}) {
    cfg.camera.noise_sigma = sigma;
    RngStream rng(99);
    double mean = 0.0;
    for (const auto& img : images) {
      mean += ssim(optical_convolve(img, k, cfg, rng), reference_convolve(img, k), scfg);
    }
    mean /= images.size();
    CHECK(mean <= prev + 1e-9);
    prev = mean;
  }
}
