// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "phasegate/masks.hpp"

using namespace phasegate;

namespace {

std::size_t count(const std::vector<bool>& v) { return static_cast<std::size_t>(std::count(v.begin(), v.end(), true)); }

bool patch_kept(const Mask& m, const PatchMaskSpec& s, std::size_t i, std::size_t j) {
  const bool first = m.kept(i * s.patch_px, j * s.patch_px);
  for (std::size_t r = 0; r < s.patch_px; ++r)
    for (std::size_t c = 0; c < s.patch_px; ++c) REQUIRE(m.kept(i * s.patch_px + r, j * s.patch_px + c) == first);
  return first;
}

}  // namespace

TEST_CASE("patch masks: lattice arithmetic") {
  PatchMaskSpec s{16, 16, 4, Geometry::periodic, 1, std::nullopt, 0};
  CHECK(patch_mask(s).keep_count() == 16 * 16 * 16);

  s.interval_k = 4;
  const Mask m4 = patch_mask(s);
  CHECK(m4.rows() == 64);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j) {
      const bool k = patch_kept(m4, s, i, j);
      CHECK(k == (i % 4 == 0 && j % 4 == 0));
      kept += k;
    }
  CHECK(kept == 16);

  s.interval_k = 2;
  CHECK(patch_mask(s).keep_count() == 64 * 16);
  CHECK(periodic_patch_count(16, 16, 2) == 64);
  CHECK(periodic_patch_count(15, 16, 4) == 16);
  CHECK(periodic_patch_count(5, 5, 9) == 1);
}

TEST_CASE("random patch masks keep the matched budget") {
  for (std::size_t k : {2u, 3u, 4u, 8u}) {
    PatchMaskSpec s{15, 17, 2, Geometry::random, k, std::nullopt, 5};
    const Mask m = patch_mask(s);
    const std::size_t want = (15 * 17 + k * k - 1) / (k * k);
    CHECK(m.keep_count() == want * 4);
  }
  PatchMaskSpec s{8, 8, 1, Geometry::random, 2, 10, 1};
  CHECK(patch_mask(s).keep_count() == 10);
  s.budget = 65;
  CHECK_THROWS(patch_mask(s));
  s.budget.reset();
  s.interval_k = 0;
  CHECK_THROWS_AS(patch_mask(s), ParameterError);
}

TEST_CASE("masks are deterministic in their seed") {
  PatchMaskSpec s{16, 16, 2, Geometry::random, 2, std::nullopt, 77};
  CHECK(patch_mask(s) == patch_mask(s));
  PatchMaskSpec t = s;
  t.seed = 78;
  CHECK_FALSE(patch_mask(s) == patch_mask(t));
  for (auto f : {LineFamily::random, LineFamily::poisson_gap, LineFamily::parametric, LineFamily::periodic}) {
    KSpaceMaskSpec k{128, 12, 4.0, f, 0.5, 2.0, 3};
    CHECK(kspace_lines(k) == kspace_lines(k));
  }
  AntennaMaskSpec a{16, 64, Geometry::random, 3, std::nullopt, AntennaAxis::tx, 4};
  CHECK(antenna_mask(a) == antenna_mask(a));
}

TEST_CASE("k-space budget arithmetic") {
  KSpaceMaskSpec s{256, 24, 4.0, LineFamily::random, 0, 0, 0};
  CHECK(acs_start(s) == 116);
  CHECK(line_budget(s) == 40);
  const auto lines = kspace_lines(s);
  CHECK(count(lines) == 64);
  for (std::size_t i = 116; i < 140; ++i) CHECK(lines[i]);

  s.accel = 12.0;  // round(256/12) = 21 < 24
  CHECK_THROWS_AS(kspace_lines(s), InfeasibleSpecError);
  s.accel = 0.5;
  CHECK_THROWS_AS(kspace_lines(s), ParameterError);
  s.accel = 4.0;
  s.acs = 300;
  CHECK_THROWS_AS(kspace_lines(s), ParameterError);
}

TEST_CASE("accel 1 samples every line for every family") {
  for (auto f : {LineFamily::random, LineFamily::poisson_gap, LineFamily::parametric, LineFamily::periodic}) {
    KSpaceMaskSpec s{96, 8, 1.0, f, 1.0, 3.0, 9};
    CHECK(count(kspace_lines(s)) == 96);
  }
}

TEST_CASE("ACS lines and exact budgets hold for every family and seed") {
  for (auto f : {LineFamily::random, LineFamily::poisson_gap, LineFamily::parametric, LineFamily::periodic})
    for (std::size_t n : {64u, 127u, 128u, 200u})
      for (double accel : {2.0, 3.0, 4.0, 6.0})
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
          KSpaceMaskSpec s{n, 10, accel, f, 0.2, 2.0, seed};
          const auto lines = kspace_lines(s);
          CHECK(count(lines) == static_cast<std::size_t>(std::llround(n / accel)));
          for (std::size_t i = acs_start(s); i < acs_start(s) + 10; ++i) CHECK(lines[i]);
        }
}

TEST_CASE("kspace_mask broadcasts lines along columns") {
  KSpaceMaskSpec s{32, 4, 4.0, LineFamily::periodic, 0, 0, 0};
  const auto lines = kspace_lines(s);
  const Mask m = kspace_mask(s, 20);
  CHECK(m.rows() == 20);
  CHECK(m.cols() == 32);
  for (std::size_t r = 0; r < 20; ++r)
    for (std::size_t c = 0; c < 32; ++c) CHECK(m.kept(r, c) == lines[c]);
}

TEST_CASE("periodic lines are evenly spread outside the ACS") {
  KSpaceMaskSpec s{128, 12, 4.0, LineFamily::periodic, 0, 0, 0};
  const auto lines = kspace_lines(s);
  std::vector<std::size_t> outside;
  for (std::size_t i = 0; i < 128; ++i)
    if (i < acs_start(s) || i >= acs_start(s) + 12) outside.push_back(i);
  std::vector<std::size_t> picked;
  for (std::size_t j = 0; j < outside.size(); ++j)
    if (lines[outside[j]]) picked.push_back(j);
  CHECK(picked.size() == 20);
  for (std::size_t j = 1; j < picked.size(); ++j) {
    const auto gap = picked[j] - picked[j - 1];
    CHECK(gap >= 5);
    CHECK(gap <= 6);
  }
}

TEST_CASE("parametric with flat density is uniform outside the ACS") {
  const std::size_t n = 64, acs = 8, trials = 10000;
  std::vector<int> hits(n, 0);
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    KSpaceMaskSpec s{n, acs, 4.0, LineFamily::parametric, 0.7, 0.0, seed};
    const auto lines = kspace_lines(s);
    for (std::size_t i = 0; i < n; ++i) hits[i] += lines[i];
  }
  const double p = 8.0 / 56.0, sd = std::sqrt(trials * p * (1 - p));
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 28 && i < 36) {
      CHECK(hits[i] == static_cast<int>(trials));
      continue;
    }
    CHECK(std::abs(hits[i] - trials * p) < 5 * sd);
  }
}

TEST_CASE("parametric line frequencies follow the density law") {
  // 8 draws over 248 lines with a gentle law keep every B * p_i below 0.1, so the
  // without-replacement correction stays well inside the binomial band.
  const std::size_t n = 256, acs = 8, trials = 10000;
  const double alpha = 0.05, beta = 1.0;
  std::vector<int> hits(n, 0);
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    KSpaceMaskSpec s{n, acs, 16.0, LineFamily::parametric, alpha, beta, seed};
    const auto lines = kspace_lines(s);
    for (std::size_t i = 0; i < n; ++i) hits[i] += lines[i];
  }
  std::vector<double> w(n, 0.0);
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 124 && i < 132) continue;
    w[i] = std::pow(1.0 + alpha * std::abs(static_cast<double>(i) - 128.0), -beta);
    wsum += w[i];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (w[i] > 0.0) total += hits[i];
  int outside = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] == 0.0) continue;
    const double p = w[i] / wsum;
    const double expect = total * p, sd = std::sqrt(total * p * (1 - p));
    outside += std::abs(hits[i] - expect) >= 5 * sd;
  }
  CHECK(outside == 0);
  CHECK(hits[132] > hits[255]);
}

TEST_CASE("poisson_gap density decays away from the centre") {
  const std::size_t n = 256, trials = 400;
  std::vector<int> hits(n, 0);
  for (std::uint64_t seed = 0; seed < trials; ++seed) {
    KSpaceMaskSpec s{n, 24, 4.0, LineFamily::poisson_gap, 0, 0, seed};
    const auto lines = kspace_lines(s);
    for (std::size_t i = 0; i < n; ++i) hits[i] += lines[i];
  }
  auto band = [&](std::size_t lo, std::size_t hi) {
    double s = 0;
    for (std::size_t i = lo; i < hi; ++i) s += hits[i] + hits[n - 1 - i];
    return s / (2.0 * (hi - lo));
  };
  CHECK(band(100, 116) > band(60, 76));
  CHECK(band(60, 76) > band(0, 16));
  // Mirror symmetric in expectation.
  double left = 0, right = 0;
  for (std::size_t i = 0; i < 116; ++i) left += hits[i];
  for (std::size_t i = 140; i < 256; ++i) right += hits[i];
  CHECK(std::abs(left - right) < 0.05 * (left + right));
}

TEST_CASE("line family names") {
  CHECK(line_family_from_string("poisson") == LineFamily::poisson_gap);
  CHECK(line_family_from_string("poisson_gap") == LineFamily::poisson_gap);
  CHECK(to_string(LineFamily::parametric) == "parametric");
  CHECK_THROWS_AS(line_family_from_string("radial"), ParameterError);
  CHECK(geometry_from_string("random") == Geometry::random);
  CHECK(antenna_axis_from_string("both") == AntennaAxis::both);
}

TEST_CASE("antenna masks") {
  Rng rng(0);
  AntennaMaskSpec s{16, 8, Geometry::periodic, 2, std::nullopt, AntennaAxis::tx, 0};
  CHECK(antenna_off_indices(s, 8, rng) == std::vector<std::size_t>{0, 2, 4, 6});
  s.interval_d = 9;
  CHECK(antenna_off_indices(s, 8, rng) == std::vector<std::size_t>{0});
  CHECK(periodic_off_count(16, 4) < periodic_off_count(16, 2));
  CHECK(periodic_off_count(16, 3) == 6);

  AntennaMaskSpec t{4, 6, Geometry::periodic, 3, std::nullopt, AntennaAxis::tx, 0};
  const Mask m = antenna_mask(t);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 6; ++c) CHECK(m.kept(r, c) == (c % 3 != 0));
  t.axis = AntennaAxis::rx;
  const Mask mr = antenna_mask(t);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 6; ++c) CHECK(mr.kept(r, c) == (r % 3 != 0));
  t.axis = AntennaAxis::both;
  const Mask mb = antenna_mask(t);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 6; ++c) CHECK(mb.kept(r, c) == (r % 3 != 0 && c % 3 != 0));

  AntennaMaskSpec rnd{16, 64, Geometry::random, 4, std::nullopt, AntennaAxis::tx, 11};
  const Mask mrnd = antenna_mask(rnd);
  CHECK(mrnd.keep_count() == 16 * (64 - 16));
  rnd.off_budget = 65;
  CHECK_THROWS(antenna_mask(rnd));
  rnd.off_budget.reset();
  rnd.interval_d = 0;
  CHECK_THROWS_AS(antenna_mask(rnd), ParameterError);
}

TEST_CASE("apply_mask") {
  Rng rng(3);
  Grid2C g(6, 5);
  for (auto& v : g.data()) v = rng.complex_gauss();
  CHECK(apply_mask(g, Mask(6, 5, true)) == g);
  CHECK(apply_mask(g, Mask(6, 5, false)) == Grid2C(6, 5));
  Mask m(6, 5, true);
  m.set(2, 3, false);
  const auto j = apply_mask(g, m);
  CHECK(j(2, 3) == cplx(0.0));
  CHECK(energy(j) < energy(g));
  CHECK(m.keep_count() == 29);
  Grid2C sparse(6, 5);
  sparse(1, 1) = 2.0;
  CHECK(energy(apply_mask(sparse, m)) == energy(sparse));
  CHECK_THROWS_AS(apply_mask(g, Mask(5, 6, true)), ParameterError);
}
