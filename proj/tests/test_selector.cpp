// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "phasegate/selector.hpp"

using namespace phasegate;
using namespace phasegate::selector;

namespace {

std::vector<mri::MultiCoilKSpace> slices(std::size_t n, std::size_t side, std::uint64_t base) {
  std::vector<mri::MultiCoilKSpace> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(mri::phantom(side, side, 2, base + i));
  return out;
}

SelectionInput small_input() {
  SelectionInput in;
  in.calibration = slices(3, 64, 100);
  in.acs = 8;
  in.alphas = {0.0, 0.2, 1.0};
  in.betas = {0.0, 2.0, 4.0};
  in.seed = 5;
  return in;
}

}  // namespace

TEST_CASE("criterion names and orientation") {
  CHECK(criterion_from_string("entropy") == Criterion::min_abs_delta_s);
  CHECK(criterion_from_string("psnr") == Criterion::max_zero_filled_psnr);
  CHECK(criterion_from_string(to_string(Criterion::min_kspace_l2)) == Criterion::min_kspace_l2);
  CHECK_THROWS_AS(criterion_from_string("ssim"), ParameterError);
  CHECK(orientation(Criterion::max_zero_filled_psnr) == Orientation::higher_better);
  CHECK(orientation(Criterion::min_kspace_l2) == Orientation::lower_better);
}

TEST_CASE("pick_best rounds and breaks ties lexicographically") {
  std::vector<ScoreRow> t{{0.5, 1.0, {}, 1.0, 0}, {0.1, 3.0, {}, 1.0 + 1e-12, 0}, {0.1, 2.0, {}, 2.0, 0}};
  CHECK(pick_best(t, Orientation::lower_better) == 1);
  CHECK(pick_best(t, Orientation::higher_better) == 2);
  t[2].mean = 1.0;
  CHECK(pick_best(t, Orientation::lower_better) == 2);
  std::vector<ScoreRow> inf{{1.0, 0.0, {}, INFINITY, 0}, {0.0, 1.0, {}, INFINITY, 0}, {0.0, 0.5, {}, 80.0, 0}};
  CHECK(pick_best(inf, Orientation::higher_better) == 1);
  CHECK_THROWS_AS(pick_best({}, Orientation::lower_better), ParameterError);
}

TEST_CASE("selection is invariant to monotone transforms of the scores") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    std::vector<ScoreRow> table;
    for (double a : {0.0, 0.1, 0.5})
      for (double b : {0.0, 1.0, 2.0}) table.push_back({a, b, {}, rng.uniform() * 3.0 + 0.1, 0});
    for (auto o : {Orientation::lower_better, Orientation::higher_better}) {
      const auto base = pick_best(table, o);
      CHECK(pick_best(table, o, [](double v) { return std::exp(v); }) == base);
      CHECK(pick_best(table, o, [](double v) { return v * v * v + 2.0; }) == base);
      CHECK(pick_best(table, o, [](double v) { return std::log(v); }) == base);
    }
  }
}

TEST_CASE("single grid point is returned") {
  SelectionInput in = small_input();
  in.calibration.resize(1);
  in.alphas = {0.3};
  in.betas = {1.5};
  for (auto c : {Criterion::min_abs_delta_s, Criterion::min_kspace_l2, Criterion::max_zero_filled_psnr}) {
    const auto r = select_mask_params(in, c);
    CHECK(r.best_alpha == 0.3);
    CHECK(r.best_beta == 1.5);
    CHECK(r.score_table.size() == 1);
    CHECK(r.calibration_ids == std::vector<std::string>{"0"});
  }
}

TEST_CASE("accel 1 is the fixed point for every criterion") {
  SelectionInput in = small_input();
  in.accel = 1.0;
  const auto ev = evaluate_grid(in);
  for (auto c : {Criterion::min_abs_delta_s, Criterion::min_kspace_l2, Criterion::max_zero_filled_psnr}) {
    const auto r = select_from(ev, c, {"a", "b", "c"});
    CHECK(r.best_alpha == 0.0);
    CHECK(r.best_beta == 0.0);
    for (const auto& row : r.score_table) {
      if (c == Criterion::max_zero_filled_psnr)
        CHECK(std::isinf(row.mean));
      else
        CHECK(row.mean == 0.0);
    }
  }
}

TEST_CASE("score table is complete and reproducible") {
  const auto in = small_input();
  const auto ev = evaluate_grid(in);
  const auto a = select_from(ev, Criterion::min_abs_delta_s, {"x", "y", "z"});
  CHECK(a.score_table.size() == 9);
  for (const auto& row : a.score_table) {
    CHECK(row.samples.size() == 3);
    CHECK(row.mean == doctest::Approx(mean(row.samples)));
  }
  const auto b = select_mask_params(in, Criterion::min_abs_delta_s);
  CHECK(a.best_alpha == b.best_alpha);
  CHECK(a.best_beta == b.best_beta);
  for (std::size_t i = 0; i < 9; ++i) CHECK(a.score_table[i].samples == b.score_table[i].samples);
  // The winner attains the optimum of the table.
  double best = INFINITY;
  for (const auto& row : a.score_table) best = std::min(best, row.mean);
  for (const auto& row : a.score_table)
    if (row.alpha == a.best_alpha && row.beta == a.best_beta) CHECK(row.mean == best);

  SelectionInput bad = in;
  bad.accel = 20.0;
  CHECK_THROWS_AS(evaluate_grid(bad), InfeasibleSpecError);
  bad = in;
  bad.calibration.clear();
  CHECK_THROWS_AS(evaluate_grid(bad), ParameterError);
}

TEST_CASE("family parsing") {
  CHECK(parse_family("poisson").family == LineFamily::poisson_gap);
  CHECK(parse_family("poisson").name == "poisson_gap");
  const auto p = parse_family("parametric:0.5:3");
  CHECK(p.family == LineFamily::parametric);
  CHECK(p.alpha == 0.5);
  CHECK(p.beta == 3.0);
  CHECK(p.name == "parametric:0.5:3");
  CHECK_THROWS_AS(parse_family("parametric"), ParameterError);
  CHECK_THROWS_AS(parse_family("random:1:2"), ParameterError);
  CHECK_THROWS_AS(parse_family("parametric:x:2"), ParameterError);
  CHECK(canonical_families().size() == 3);
}

TEST_CASE("one-cell ablation equals a direct delta_s call") {
  const auto data = slices(2, 64, 7);
  AblationGrid g;
  g.wins = {24};
  g.sigma_ratios = {0.5};
  g.hop_ratios = {0.5};
  g.families = {parse_family("periodic")};
  const auto res = ablation_sweep(data, g, 8, 3);
  REQUIRE(res.rows.size() == 2);
  REQUIRE(res.cells.size() == 1);
  CHECK(res.stability.empty());
  for (std::size_t s = 0; s < 2; ++s) {
    const auto ref = mri::rss_reconstruct(data[s]);
    const Mask m = kspace_mask({64, 8, 4.0, LineFamily::periodic, 0, 0, slice_seed(3, s)}, 64);
    const auto zf = mri::zero_fill(data[s], m, ref.norm_factor);
    const double direct = delta_s(ref.grid, zf.grid, HusimiParams{24, 12.0, 12, {}}, Weighting::uniform).abs_delta;
    CHECK(res.rows[s].abs_delta_s == direct);
  }
  CHECK(res.cells[0].n == 2);
  CHECK(res.cells[0].min <= res.cells[0].median);
  CHECK(res.cells[0].median <= res.cells[0].max);
}

TEST_CASE("ablation flags windows larger than the field") {
  const auto data = slices(1, 48, 1);
  AblationGrid g;
  g.wins = {24, 96};
  g.sigma_ratios = {1.0};
  g.hop_ratios = {1.0};
  g.families = {parse_family("random")};
  const auto res = ablation_sweep(data, g, 8, 0);
  REQUIRE(res.rows.size() == 2);
  CHECK_FALSE(res.rows[0].skipped);
  CHECK(res.rows[1].skipped);
  CHECK(res.cells[1].skipped);
  REQUIRE(res.stability.size() == 1);
  CHECK(res.stability[0].n == 0);
  g.hop_ratios = {1.5};
  CHECK_THROWS_AS(ablation_sweep(data, g, 8, 0), ParameterError);
}

TEST_CASE("correlate_quality_entropy") {
  const std::vector<double> d{0.1, 0.2, 0.3, 0.4, 0.5}, q{30, 28, 26, 24, 22};
  const auto f = correlate_quality_entropy(d, q);
  CHECK(f.pearson_r == doctest::Approx(-1.0));
  CHECK(f.slope == doctest::Approx(-20.0));
  const std::vector<double> d2{0.1, 0.2}, q2{1, 3};
  const auto g = correlate_quality_entropy(d2, q2);
  CHECK(g.r_ci_low == -1.0);
  CHECK(g.r_ci_high == 1.0);
  const std::vector<double> flat{1, 1, 1};
  CHECK_THROWS_AS(correlate_quality_entropy(flat, flat), DegenerateError);
}

TEST_CASE("family study rows") {
  const auto data = slices(2, 64, 40);
  const auto rows = family_study(data, canonical_families(), {2.0, 4.0}, 8, HusimiParams::mri(), 1);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].accel == 2.0);
  CHECK(rows[3].family == "random");
  for (const auto& r : rows) {
    CHECK(r.max_delta_s < 0.0);
    CHECK(r.mean_abs_delta_s > 0.0);
    CHECK(r.mean_ssim <= 1.0);
  }
  // More undersampling costs quality for every family.
  for (std::size_t i = 0; i < 3; ++i) CHECK(rows[i].mean_psnr > rows[i + 3].mean_psnr);
}
