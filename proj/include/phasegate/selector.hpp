// SPDX-License-Identifier: Apache-2.0
// Zero-training mask design: (alpha, beta) grid search, Husimi ablation sweeps, quality/entropy correlation.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "phasegate/mri.hpp"

namespace phasegate::selector {

enum class Criterion { min_abs_delta_s, min_kspace_l2, max_zero_filled_psnr };
std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);
Orientation orientation(Criterion c);

inline const std::vector<double> kDefaultAlphas{0.0, 0.05, 0.1, 0.2, 0.5, 1.0};
inline const std::vector<double> kDefaultBetas{0.0, 0.5, 1.0, 2.0, 3.0, 4.0};

struct ScoreRow {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> samples;  // per calibration sample
  double mean = 0.0;
  double stddev = 0.0;
};

struct SelectionResult {
  double best_alpha = 0.0;
  double best_beta = 0.0;
  Criterion criterion = Criterion::min_abs_delta_s;
  std::vector<ScoreRow> score_table;
  std::vector<std::string> calibration_ids;
};

// Criterion value for one sample (PSNR may be +inf).
double criterion_value(Criterion c, const mri::MriMetrics& m);

// Index of the best row; scores are rounded to 1e-9 and ties go to the smallest (alpha, beta).
std::size_t pick_best(const std::vector<ScoreRow>& table, Orientation o,
                      const std::function<double(double)>& transform = {});

struct SelectionInput {
  std::vector<mri::MultiCoilKSpace> calibration;
  std::vector<std::string> ids;  // defaults to "0", "1", ...
  double accel = 4.0;
  std::size_t acs = 12;
  std::vector<double> alphas = kDefaultAlphas;
  std::vector<double> betas = kDefaultBetas;
  HusimiParams husimi = HusimiParams::mri();
  std::uint64_t seed = 0;
};

// Per-sample metrics for every grid cell; shared by all three criteria.
struct GridEvaluation {
  std::vector<std::pair<double, double>> cells;       // (alpha, beta) in table order
  std::vector<std::vector<mri::MriMetrics>> metrics;  // [cell][sample]
};
GridEvaluation evaluate_grid(const SelectionInput& in);
SelectionResult select_from(const GridEvaluation& eval, Criterion c, const std::vector<std::string>& ids);
SelectionResult select_mask_params(const SelectionInput& in, Criterion c);

// Mask seed for the sample-th slice; the same stream is reused across grid cells.
std::uint64_t slice_seed(std::uint64_t base, std::size_t sample);

// A named line-mask family: one of the canonical families or a fixed (alpha, beta) parametric mask.
struct FamilySpec {
  std::string name;
  LineFamily family = LineFamily::random;
  double alpha = 0.0;
  double beta = 0.0;
};
std::vector<FamilySpec> canonical_families();
FamilySpec parse_family(const std::string& s);  // "random", "poisson_gap", "parametric:0.5:3", ...

struct AblationGrid {
  std::vector<std::size_t> wins{12, 24, 48, 96};
  std::vector<double> sigma_ratios{0.5, 1.0, 2.0};
  std::vector<double> hop_ratios{0.25, 0.5, 1.0};
  std::vector<FamilySpec> families = canonical_families();
  std::vector<double> accels{4.0};
  void validate() const;
};

struct SweepRow {
  std::size_t win = 0;
  double sigma = 0.0;
  std::size_t hop = 0;
  double sigma_ratio = 0.0;
  double hop_ratio = 0.0;
  std::string family;
  double accel = 0.0;
  std::size_t sample = 0;
  double abs_delta_s = 0.0;
  bool skipped = false;
};

struct CellSummary {
  std::size_t win = 0;
  double sigma_ratio = 0.0;
  double hop_ratio = 0.0;
  std::string family;
  double accel = 0.0;
  std::size_t n = 0;
  double mean = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, min = 0.0, max = 0.0;
  bool skipped = false;
};

struct StabilityRow {
  std::size_t win_a = 0;
  std::size_t win_b = 0;
  double spearman = 0.0;
  std::size_t n = 0;
};

struct AblationResult {
  std::vector<SweepRow> rows;
  std::vector<CellSummary> cells;
  std::vector<StabilityRow> stability;
};

// sigma = win * sigma_ratio, hop = max(1, round(win * hop_ratio)); uniform weighting.
AblationResult ablation_sweep(const std::vector<mri::MultiCoilKSpace>& data, const AblationGrid& grid,
                              std::size_t acs, std::uint64_t seed);

FitResult correlate_quality_entropy(std::span<const double> abs_delta_s, std::span<const double> quality);

// One row per (family, accel): means over samples of the zero-filled metrics.
struct FamilyStudyRow {
  std::string family;
  double accel = 0.0;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double mean_abs_delta_s = 0.0;
  double max_delta_s = 0.0;  // largest signed change seen
};
std::vector<FamilyStudyRow> family_study(const std::vector<mri::MultiCoilKSpace>& data,
                                         const std::vector<FamilySpec>& families, const std::vector<double>& accels,
                                         std::size_t acs, const HusimiParams& p, std::uint64_t seed);

}  // namespace phasegate::selector
