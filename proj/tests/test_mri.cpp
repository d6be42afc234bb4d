// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "naive.hpp"
#include "phasegate/mri.hpp"

using namespace phasegate;
using namespace phasegate::mri;

namespace {

Grid2C noise(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Grid2C g(r, c);
  for (auto& v : g.data()) v = rng.complex_gauss();
  return g;
}

Grid2R uniform_image(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Grid2R g(r, c);
  for (auto& v : g.data()) v = rng.uniform();
  return g;
}

double max_diff(const Grid2R& a, const Grid2R& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("rss of a centred delta is flat") {
  Grid2C k(16, 16);
  k(8, 8) = 3.0;
  const auto img = rss_reconstruct({{k}});
  for (double v : img.grid.data()) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(img.norm_factor == doctest::Approx(3.0 / 16.0));
}

TEST_CASE("rss combination") {
  const auto k = noise(12, 10, 1);
  const auto one = rss_magnitude({{k}});
  const auto direct = magnitude(dft2_centered(k, true));
  CHECK(max_diff(one, direct) < 1e-14);
  const auto two = rss_magnitude({{k, k}});
  for (std::size_t i = 0; i < two.size(); ++i) CHECK(two[i] == doctest::Approx(std::sqrt(2.0) * one[i]).epsilon(1e-12));
  const auto img = rss_reconstruct({{k}});
  double mx = 0.0;
  for (double v : img.grid.data()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    mx = std::max(mx, v);
  }
  CHECK(mx == doctest::Approx(1.0));
  CHECK_THROWS_AS(rss_reconstruct({{Grid2C(8, 8)}}), DegenerateError);
  CHECK_THROWS_AS(rss_reconstruct({{Grid2C(8, 8), Grid2C(8, 9)}}), ParameterError);
  CHECK_THROWS_AS(rss_reconstruct({}), ParameterError);
}

TEST_CASE("zero_fill with a full mask is rss_reconstruct") {
  const MultiCoilKSpace k{{noise(16, 16, 2), noise(16, 16, 3)}};
  const auto ref = rss_reconstruct(k);
  const auto zf = zero_fill(k, Mask(16, 16, true), ref.norm_factor);
  CHECK(zf.grid == ref.grid);
  CHECK(zf.norm_factor == ref.norm_factor);
}

TEST_CASE("zero-filled energy never exceeds the full image") {
  const MultiCoilKSpace k{{noise(32, 32, 4), noise(32, 32, 5)}};
  const auto ref = rss_reconstruct(k);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Mask m = kspace_mask({32, 4, 2.0 + s, LineFamily::random, 0, 0, s}, 32);
    const auto zf = zero_fill(k, m, ref.norm_factor);
    double ez = 0, ef = 0;
    for (std::size_t i = 0; i < zf.grid.size(); ++i) {
      ez += zf.grid[i] * zf.grid[i];
      ef += ref.grid[i] * ref.grid[i];
    }
    CHECK(ez <= ef + 1e-10);
  }
}

TEST_CASE("periodic line masks fold the image into exact ghost replicas") {
  const std::size_t n = 64;
  const auto f = noise(n, n, 6);  // image domain
  const auto k = dft2_centered(f);
  for (std::size_t q : {2u, 4u, 8u}) {
    Mask m(n, n, false);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; c += q) m.set(r, c, true);
    const auto img = rss_magnitude(mask_kspace({{k}}, m));
    double err = 0.0;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        cplx acc = 0.0;
        for (std::size_t t = 0; t < q; ++t) acc += f(r, (c + t * n / q) % n);
        err = std::max(err, std::abs(img(r, c) - std::abs(acc) / static_cast<double>(q)));
      }
    CHECK(err < 1e-10);
  }
}

TEST_CASE("psnr") {
  const auto a = uniform_image(16, 16, 1);
  CHECK(psnr(a, a) == std::numeric_limits<double>::infinity());
  CHECK(serialized_psnr(psnr(a, a)) == 200.0);
  CHECK(serialized_psnr(31.5) == 31.5);
  Grid2R b = a;
  for (auto& v : b.data()) v += 0.1;
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));
  const auto c = uniform_image(64, 64, 2), d = uniform_image(64, 64, 3);
  CHECK(std::abs(psnr(c, d) - 10.0 * std::log10(1.0 / naive::mse(c, d))) < 1e-9);
  CHECK(std::abs(psnr(c, d, 2.0) - 10.0 * std::log10(4.0 / naive::mse(c, d))) < 1e-9);
  CHECK_THROWS_AS(psnr(a, c), ParameterError);
}

TEST_CASE("ssim") {
  const auto a = uniform_image(64, 64, 4), b = uniform_image(64, 64, 5);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-12);
  CHECK(std::abs(ssim(a, b) - naive::ssim(a, b)) < 1e-9);
  Grid2R blurred = a;
  for (std::size_t i = 1; i < blurred.size(); ++i) blurred[i] = 0.5 * (a[i] + a[i - 1]);
  CHECK(std::abs(ssim(a, blurred) - naive::ssim(a, blurred)) < 1e-9);

  Grid2R bin(32, 32), inv(32, 32);
  Rng rng(8);
  for (std::size_t i = 0; i < bin.size(); ++i) {
    bin[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    inv[i] = 1.0 - bin[i];
  }
  const double s = ssim(bin, inv);
  CHECK(s < 0.0);
  CHECK(std::abs(s - naive::ssim(bin, inv)) < 1e-9);
  CHECK_THROWS_AS(ssim(Grid2R(10, 40), Grid2R(10, 40)), ParameterError);
}

TEST_CASE("kspace_l2") {
  const MultiCoilKSpace k{{noise(8, 8, 7), noise(8, 8, 9)}};
  CHECK(kspace_l2(k, Mask(8, 8, true)) == 0.0);
  CHECK(kspace_l2(k, Mask(8, 8, false)) == doctest::Approx(1.0));
  MultiCoilKSpace flat{{Grid2C(4, 4, 1.0)}};
  Mask half(4, 4, true);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 4; ++c) half.set(r, c, false);
  CHECK(kspace_l2(flat, half) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(kspace_l2({{Grid2C(4, 4)}}, half), DegenerateError);
  CHECK_THROWS_AS(kspace_l2(flat, Mask(4, 5, true)), ParameterError);

  const MultiCoilKSpace big{{noise(64, 64, 10)}};
  const Mask m = kspace_mask({64, 8, 4.0, LineFamily::random, 0, 0, 1}, 64);
  double lost = 0.0, total = 0.0;
  for (std::size_t i = 0; i < big.coils[0].size(); ++i) {
    total += std::norm(big.coils[0][i]);
    if (!m.grid()[i]) lost += std::norm(big.coils[0][i]);
  }
  CHECK(std::abs(kspace_l2(big, m) - std::sqrt(lost / total)) < 1e-9);
}

TEST_CASE("kspace_l2 is monotone for nested masks") {
  const MultiCoilKSpace k{{noise(32, 32, 11)}};
  Rng rng(2);
  Mask m(32, 32, false);
  double prev = kspace_l2(k, m);
  for (std::size_t c : rng.choose_k(32, 32)) {
    for (std::size_t r = 0; r < 32; ++r) m.set(r, c, true);
    const double now = kspace_l2(k, m);
    CHECK(now <= prev);
    prev = now;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("phantom") {
  CHECK_THROWS_AS(phantom(16, 64, 1, 0), ParameterError);
  const auto a = phantom(64, 64, 4, 3), b = phantom(64, 64, 4, 3), c = phantom(64, 64, 4, 4);
  CHECK(a.coils == b.coils);
  CHECK_FALSE(a.coils == c.coils);
  CHECK(a.coils.size() == 4);
  double e = 0.0;
  for (const auto& g : a.coils) e += energy(g);
  CHECK(std::isfinite(e));
  CHECK(e > 0.0);

  PhantomOptions clean;
  clean.noise_std = 0.0;
  const auto imgs = phantom_coil_images(48, 40, 1, 5, clean);
  const auto k = phantom(48, 40, 1, 5, clean);
  CHECK(max_diff(rss_magnitude(k), magnitude(imgs[0])) < 1e-8);
}

TEST_CASE("k-space undersampling of a phantom loses entropy for every family") {
  const auto k = phantom(128, 128, 4, 21);
  const auto ref = rss_reconstruct(k);
  for (auto f : {LineFamily::random, LineFamily::periodic, LineFamily::poisson_gap, LineFamily::parametric}) {
    const Mask m = kspace_mask({128, 12, 4.0, f, 0.5, 2.0, 1}, 128);
    const auto met = evaluate_mask(k, ref, m, HusimiParams::mri());
    CHECK(met.delta_s < 0.0);
    CHECK(met.abs_delta_s > 0.0);
    CHECK(met.abs_delta_s == -met.delta_s);
    CHECK(std::isfinite(met.psnr_db));
    CHECK(met.kspace_l2 > 0.0);
    CHECK(met.kspace_l2 < 1.0);
  }
  const auto full = evaluate_mask(k, ref, Mask(128, 128, true), HusimiParams::mri());
  CHECK(full.delta_s == 0.0);
  CHECK(full.kspace_l2 == 0.0);
  CHECK(std::isinf(full.psnr_db));
  CHECK(full.ssim == doctest::Approx(1.0));
}
