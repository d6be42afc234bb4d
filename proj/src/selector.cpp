// SPDX-License-Identifier: Apache-2.0
#include "phasegate/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace phasegate::selector {

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::min_abs_delta_s: return "min_abs_delta_s";
    case Criterion::min_kspace_l2: return "min_kspace_l2";
    case Criterion::max_zero_filled_psnr: return "max_zero_filled_psnr";
  }
  return "?";
}

Criterion criterion_from_string(const std::string& s) {
  if (s == "min_abs_delta_s" || s == "abs_delta_s" || s == "entropy") return Criterion::min_abs_delta_s;
  if (s == "min_kspace_l2" || s == "kspace_l2") return Criterion::min_kspace_l2;
  if (s == "max_zero_filled_psnr" || s == "psnr") return Criterion::max_zero_filled_psnr;
  throw ParameterError("unknown criterion '" + s + "'");
}

Orientation orientation(Criterion c) {
  return c == Criterion::max_zero_filled_psnr ? Orientation::higher_better : Orientation::lower_better;
}

double criterion_value(Criterion c, const mri::MriMetrics& m) {
  switch (c) {
    case Criterion::min_abs_delta_s: return m.abs_delta_s;
    case Criterion::min_kspace_l2: return m.kspace_l2;
    case Criterion::max_zero_filled_psnr: return m.psnr_db;
  }
  return 0.0;
}

std::uint64_t slice_seed(std::uint64_t base, std::size_t sample) { return base + sample; }

std::size_t pick_best(const std::vector<ScoreRow>& table, Orientation o, const std::function<double(double)>& transform) {
  if (table.empty()) throw ParameterError("empty score table");
  auto key = [&](const ScoreRow& r) {
    double v = transform ? transform(r.mean) : r.mean;
    if (std::isfinite(v)) v = std::round(v * 1e9) / 1e9;
    return o == Orientation::lower_better ? v : -v;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const double a = key(table[i]), b = key(table[best]);
    const bool better = a < b || (a == b && std::tie(table[i].alpha, table[i].beta) <
                                                std::tie(table[best].alpha, table[best].beta));
    if (better) best = i;
  }
  return best;
}

GridEvaluation evaluate_grid(const SelectionInput& in) {
  if (in.calibration.empty()) throw ParameterError("calibration set is empty");
  if (in.alphas.empty() || in.betas.empty()) throw ParameterError("alpha and beta grids must be non-empty");
  std::vector<mri::MagnitudeImage> refs;
  for (const auto& k : in.calibration) refs.push_back(mri::rss_reconstruct(k));
  GridEvaluation ev;
  for (double a : in.alphas)
    for (double b : in.betas) {
      ev.cells.emplace_back(a, b);
      std::vector<mri::MriMetrics> per;
      for (std::size_t s = 0; s < in.calibration.size(); ++s) {
        const auto& k = in.calibration[s];
        KSpaceMaskSpec spec{k.cols(), in.acs, in.accel, LineFamily::parametric, a, b, slice_seed(in.seed, s)};
        const Mask m = kspace_mask(spec, k.rows());
        per.push_back(mri::evaluate_mask(k, refs[s], m, in.husimi));
      }
      ev.metrics.push_back(std::move(per));
    }
  return ev;
}

SelectionResult select_from(const GridEvaluation& ev, Criterion c, const std::vector<std::string>& ids) {
  SelectionResult res;
  res.criterion = c;
  res.calibration_ids = ids;
  for (std::size_t i = 0; i < ev.cells.size(); ++i) {
    ScoreRow row;
    row.alpha = ev.cells[i].first;
    row.beta = ev.cells[i].second;
    for (const auto& m : ev.metrics[i]) row.samples.push_back(criterion_value(c, m));
    const bool any_inf = std::any_of(row.samples.begin(), row.samples.end(), [](double v) { return std::isinf(v); });
    if (any_inf) {
      // PSNR: identical images. Averaging with +inf would hide finite differences.
      std::vector<double> capped;
      for (double v : row.samples) capped.push_back(mri::serialized_psnr(v));
      const bool all_inf = std::all_of(row.samples.begin(), row.samples.end(), [](double v) { return std::isinf(v); });
      row.mean = all_inf ? std::numeric_limits<double>::infinity() : mean(capped);
      row.stddev = sample_stddev(capped);
    } else {
      row.mean = mean(row.samples);
      row.stddev = sample_stddev(row.samples);
    }
    res.score_table.push_back(std::move(row));
  }
  const std::size_t best = pick_best(res.score_table, orientation(c));
  res.best_alpha = res.score_table[best].alpha;
  res.best_beta = res.score_table[best].beta;
  return res;
}

SelectionResult select_mask_params(const SelectionInput& in, Criterion c) {
  std::vector<std::string> ids = in.ids;
  if (ids.empty())
    for (std::size_t i = 0; i < in.calibration.size(); ++i) ids.push_back(std::to_string(i));
  return select_from(evaluate_grid(in), c, ids);
}

// --- families --------------------------------------------------------------

std::vector<FamilySpec> canonical_families() {
  return {{"random", LineFamily::random, 0.0, 0.0},
          {"periodic", LineFamily::periodic, 0.0, 0.0},
          {"poisson_gap", LineFamily::poisson_gap, 0.0, 0.0}};
}

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

FamilySpec parse_family(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    const LineFamily f = line_family_from_string(s);
    if (f == LineFamily::parametric) throw ParameterError("parametric family needs alpha and beta, e.g. parametric:0.5:3");
    return {to_string(f), f, 0.0, 0.0};
  }
  if (s.substr(0, colon) != "parametric") throw ParameterError("only parametric families take parameters");
  const auto second = s.find(':', colon + 1);
  if (second == std::string::npos) throw ParameterError("expected parametric:ALPHA:BETA");
  try {
    const double a = std::stod(s.substr(colon + 1, second - colon - 1));
    const double b = std::stod(s.substr(second + 1));
    return {"parametric:" + fmt_num(a) + ":" + fmt_num(b), LineFamily::parametric, a, b};
  } catch (const std::logic_error&) {
    throw ParameterError("cannot parse family '" + s + "'");
  }
}

// --- ablation --------------------------------------------------------------

void AblationGrid::validate() const {
  if (wins.empty() || sigma_ratios.empty() || hop_ratios.empty() || families.empty() || accels.empty())
    throw ParameterError("ablation grid has an empty axis");
  for (auto w : wins)
    if (w < 1) throw ParameterError("window sizes must be positive");
  for (double r : sigma_ratios)
    if (!(r > 0.0)) throw ParameterError("sigma ratios must be positive");
  for (double r : hop_ratios)
    if (!(r > 0.0 && r <= 1.0)) throw ParameterError("hop ratios must lie in (0, 1]");
  for (double a : accels)
    if (!(a >= 1.0)) throw ParameterError("accelerations must be >= 1");
}

AblationResult ablation_sweep(const std::vector<mri::MultiCoilKSpace>& data, const AblationGrid& grid, std::size_t acs,
                              std::uint64_t seed) {
  grid.validate();
  if (data.empty()) throw ParameterError("ablation needs at least one field");
  AblationResult res;
  std::vector<mri::MagnitudeImage> refs;
  for (const auto& k : data) refs.push_back(mri::rss_reconstruct(k));

  // rows grouped by cell for the summary
  using CellKey = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, std::size_t>;
  std::map<CellKey, std::vector<double>> by_cell;

  for (std::size_t fi = 0; fi < grid.families.size(); ++fi) {
    const auto& fam = grid.families[fi];
    for (std::size_t ai = 0; ai < grid.accels.size(); ++ai) {
      for (std::size_t s = 0; s < data.size(); ++s) {
        const auto& k = data[s];
        KSpaceMaskSpec spec{k.cols(), acs, grid.accels[ai], fam.family, fam.alpha, fam.beta, slice_seed(seed, s)};
        const Mask m = kspace_mask(spec, k.rows());
        const auto zf = mri::zero_fill(k, m, refs[s].norm_factor);
        for (std::size_t wi = 0; wi < grid.wins.size(); ++wi)
          for (std::size_t si = 0; si < grid.sigma_ratios.size(); ++si)
            for (std::size_t hi = 0; hi < grid.hop_ratios.size(); ++hi) {
              const std::size_t w = grid.wins[wi];
              SweepRow row;
              row.win = w;
              row.sigma_ratio = grid.sigma_ratios[si];
              row.hop_ratio = grid.hop_ratios[hi];
              row.sigma = static_cast<double>(w) * row.sigma_ratio;
              row.hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(w) * row.hop_ratio)));
              row.family = fam.name;
              row.accel = grid.accels[ai];
              row.sample = s;
              if (w > k.rows() || w > k.cols()) {
                row.skipped = true;
                row.abs_delta_s = std::numeric_limits<double>::quiet_NaN();
              } else {
                const HusimiParams p{w, row.sigma, row.hop, {}};
                row.abs_delta_s = delta_s(refs[s].grid, zf.grid, p, Weighting::uniform).abs_delta;
                by_cell[{wi, si, hi, fi, ai}].push_back(row.abs_delta_s);
              }
              res.rows.push_back(row);
            }
      }
    }
  }

  // Summaries in (win, sigma, hop, family, accel) order.
  for (std::size_t wi = 0; wi < grid.wins.size(); ++wi)
    for (std::size_t si = 0; si < grid.sigma_ratios.size(); ++si)
      for (std::size_t hi = 0; hi < grid.hop_ratios.size(); ++hi)
        for (std::size_t fi = 0; fi < grid.families.size(); ++fi)
          for (std::size_t ai = 0; ai < grid.accels.size(); ++ai) {
            CellSummary c;
            c.win = grid.wins[wi];
            c.sigma_ratio = grid.sigma_ratios[si];
            c.hop_ratio = grid.hop_ratios[hi];
            c.family = grid.families[fi].name;
            c.accel = grid.accels[ai];
            auto it = by_cell.find({wi, si, hi, fi, ai});
            if (it == by_cell.end()) {
              c.skipped = true;
              const double nan = std::numeric_limits<double>::quiet_NaN();
              c.mean = c.q25 = c.median = c.q75 = c.min = c.max = nan;
            } else {
              const auto& v = it->second;
              c.n = v.size();
              c.mean = mean(v);
              c.q25 = quantile(v, 0.25);
              c.median = quantile(v, 0.5);
              c.q75 = quantile(v, 0.75);
              c.min = *std::min_element(v.begin(), v.end());
              c.max = *std::max_element(v.begin(), v.end());
            }
            res.cells.push_back(c);
          }

  // Rank agreement of cell means between neighbouring window sizes.
  const std::size_t per_win = grid.sigma_ratios.size() * grid.hop_ratios.size() * grid.families.size() * grid.accels.size();
  for (std::size_t wi = 0; wi + 1 < grid.wins.size(); ++wi) {
    std::vector<double> a, b;
    for (std::size_t j = 0; j < per_win; ++j) {
      const auto& ca = res.cells[wi * per_win + j];
      const auto& cb = res.cells[(wi + 1) * per_win + j];
      if (ca.skipped || cb.skipped) continue;
      a.push_back(ca.mean);
      b.push_back(cb.mean);
    }
    StabilityRow row{grid.wins[wi], grid.wins[wi + 1], std::numeric_limits<double>::quiet_NaN(), a.size()};
    if (a.size() >= 2) {
      try {
        row.spearman = spearman(a, b);
      } catch (const DegenerateError&) {
      }
    }
    res.stability.push_back(row);
  }
  return res;
}

FitResult correlate_quality_entropy(std::span<const double> abs_delta_s, std::span<const double> quality) {
  return ols_pearson(abs_delta_s, quality);
}

std::vector<FamilyStudyRow> family_study(const std::vector<mri::MultiCoilKSpace>& data,
                                         const std::vector<FamilySpec>& families, const std::vector<double>& accels,
                                         std::size_t acs, const HusimiParams& p, std::uint64_t seed) {
  if (data.empty()) throw ParameterError("family study needs data");
  std::vector<mri::MagnitudeImage> refs;
  for (const auto& k : data) refs.push_back(mri::rss_reconstruct(k));
  std::vector<FamilyStudyRow> out;
  for (double accel : accels)
    for (const auto& fam : families) {
      std::vector<double> ps, ss, ds;
      double max_d = -std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < data.size(); ++s) {
        const auto& k = data[s];
        KSpaceMaskSpec spec{k.cols(), acs, accel, fam.family, fam.alpha, fam.beta, slice_seed(seed, s)};
        const auto m = mri::evaluate_mask(k, refs[s], kspace_mask(spec, k.rows()), p);
        ps.push_back(mri::serialized_psnr(m.psnr_db));
        ss.push_back(m.ssim);
        ds.push_back(m.abs_delta_s);
        max_d = std::max(max_d, m.delta_s);
      }
      out.push_back({fam.name, accel, mean(ps), mean(ss), mean(ds), max_d});
    }
  return out;
}

}  // namespace phasegate::selector
