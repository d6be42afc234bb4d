// SPDX-License-Identifier: Apache-2.0
#include "phasegate/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace phasegate {

void HusimiParams::validate() const {
  if (win < 1) throw ParameterError("win must be >= 1");
  if (hop < 1 || hop > win) throw ParameterError("hop must satisfy 1 <= hop <= win");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be positive");
  for (auto b : band)
    if (b >= win * win) throw ParameterError("band bin outside the win x win grid");
  std::vector<std::size_t> sorted = band;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ParameterError("band contains duplicate bins");
}

std::string to_string(Weighting w) { return w == Weighting::energy ? "energy" : "uniform"; }

Weighting weighting_from_string(const std::string& s) {
  if (s == "uniform") return Weighting::uniform;
  if (s == "energy") return Weighting::energy;
  throw ParameterError("unknown weighting '" + s + "'");
}

namespace {

template <class Field>
PhaseSpaceDensity husimi_impl(const Field& field, const HusimiParams& p) {
  p.validate();
  if (p.win > field.rows() || p.win > field.cols())
    throw ParameterError("window larger than the grid (" + std::to_string(p.win) + " > " +
                         std::to_string(std::min(field.rows(), field.cols())) + ")");
  const auto w = gaussian_window(p.win, p.sigma);
  const std::size_t W = p.win;
  PhaseSpaceDensity d;
  d.params = p;
  d.band_size = p.band_size();
  for (std::size_t r = 0; r + W <= field.rows(); r += p.hop)
    for (std::size_t c = 0; c + W <= field.cols(); c += p.hop) d.centers.push_back({r, c});
  d.spectra.resize(d.centers.size() * d.band_size);
  d.energies.resize(d.centers.size());
  d.excluded.assign(d.centers.size(), false);

  std::vector<cplx> buf(W * W);
  std::vector<cplx> col(W);
  const double scale = 1.0 / static_cast<double>(W * W);  // |1/W|^2 from the orthonormal factor
  for (std::size_t i = 0; i < d.centers.size(); ++i) {
    const auto [r0, c0] = d.centers[i];
    for (std::size_t r = 0; r < W; ++r)
      for (std::size_t c = 0; c < W; ++c) buf[r * W + c] = w(r, c) * field(r0 + r, c0 + c);
    for (std::size_t r = 0; r < W; ++r) fft_inplace(std::span<cplx>(buf.data() + r * W, W), false);
    for (std::size_t c = 0; c < W; ++c) {
      for (std::size_t r = 0; r < W; ++r) col[r] = buf[r * W + c];
      fft_inplace(col, false);
      for (std::size_t r = 0; r < W; ++r) buf[r * W + c] = col[r];
    }
    double* out = d.spectra.data() + i * d.band_size;
    KahanSum e;
    for (std::size_t b = 0; b < d.band_size; ++b) {
      const std::size_t bin = p.band.empty() ? b : p.band[b];
      out[b] = std::norm(buf[bin]) * scale;
      e.add(out[b]);
    }
    d.energies[i] = e.value();
  }
  return d;
}

}  // namespace

PhaseSpaceDensity husimi(const Grid2C& field, const HusimiParams& p) { return husimi_impl(field, p); }
PhaseSpaceDensity husimi(const Grid2R& field, const HusimiParams& p) { return husimi_impl(field, p); }

PhaseSpaceDensity band_normalize(PhaseSpaceDensity d, double energy_floor) {
  if (!(energy_floor >= 0.0)) throw ParameterError("energy floor must be >= 0");
  d.excluded.assign(d.centers.size(), false);
  for (std::size_t i = 0; i < d.centers.size(); ++i) {
    if (!(d.energies[i] > energy_floor)) {
      d.excluded[i] = true;
      continue;
    }
    double* row = d.spectra.data() + i * d.band_size;
    for (std::size_t b = 0; b < d.band_size; ++b) row[b] /= d.energies[i];
  }
  d.normalized = true;
  return d;
}

double shannon_entropy(std::span<const double> p) {
  KahanSum s;
  for (double v : p)
    if (v > 0.0) s.add(-v * std::log(v));
  return s.value();
}

EntropyResult band_entropy(const PhaseSpaceDensity& d, Weighting weighting) {
  if (!d.normalized) throw ParameterError("band_entropy expects a band-normalized density");
  EntropyResult res;
  res.weighting = weighting;
  res.params = d.params;
  res.local.assign(d.centers.size(), std::numeric_limits<double>::quiet_NaN());
  KahanSum num, den;
  std::size_t used = 0;
  const double cap = std::log(static_cast<double>(d.band_size));
  for (std::size_t i = 0; i < d.centers.size(); ++i) {
    if (d.excluded[i]) continue;
    // Round-off can push a flat spectrum a hair past ln|B|.
    const double s = std::clamp(shannon_entropy(d.spectrum(i)), 0.0, cap);
    res.local[i] = s;
    const double wgt = weighting == Weighting::energy ? d.energies[i] : 1.0;
    num.add(s * wgt);
    den.add(wgt);
    ++used;
  }
  if (used == 0) throw EmptyAuditError("every window is below the energy floor");
  res.global = num.value() / den.value();
  return res;
}

double global_entropy(const Grid2C& field, const HusimiParams& p, Weighting w, double energy_floor) {
  return band_entropy(band_normalize(husimi(field, p), energy_floor), w).global;
}

namespace {

DeltaSReport make_report(double s_ref, double s_acq) {
  DeltaSReport r;
  r.s_ref = s_ref;
  r.s_acq = s_acq;
  r.delta = s_acq - s_ref;
  r.abs_delta = std::abs(r.delta);
  return r;
}

template <class Field>
std::optional<double> try_entropy(const Field& f, const HusimiParams& p, Weighting w, double floor) {
  try {
    return band_entropy(band_normalize(husimi(f, p), floor), w).global;
  } catch (const EmptyAuditError&) {
    return std::nullopt;
  }
}

template <class Field>
DeltaSReport delta_s_impl(const Field& ref, const Field& acq, const HusimiParams& p, Weighting w, double floor) {
  if (!ref.same_shape(acq)) throw ParameterError("reference and acquired shapes differ");
  const double s_ref = band_entropy(band_normalize(husimi(ref, p), floor), w).global;
  const double s_acq = band_entropy(band_normalize(husimi(acq, p), floor), w).global;
  auto r = make_report(s_ref, s_acq);
  r.scales.push_back({p.win, p.sigma, p.hop, s_ref, s_acq});
  return r;
}

template <class Field>
DeltaSReport multiscale_impl(const Field& ref, const Field& acq, const std::vector<Scale>& scales, double hop_ratio,
                             double floor) {
  if (scales.empty()) throw ParameterError("empty scale list");
  if (!ref.same_shape(acq)) throw ParameterError("reference and acquired shapes differ");
  if (!(hop_ratio > 0.0 && hop_ratio <= 1.0)) throw ParameterError("hop ratio must lie in (0, 1]");
  DeltaSReport rep;
  KahanSum sr, sa;
  std::size_t used = 0;
  for (const auto& sc : scales) {
    HusimiParams p{sc.win, sc.sigma, std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(sc.win * hop_ratio))), {}};
    if (sc.win > ref.rows() || sc.win > ref.cols())
      throw ParameterError("scale " + std::to_string(sc.win) + " does not fit the grid");
    ScaleEntry e{p.win, p.sigma, p.hop, try_entropy(ref, p, Weighting::energy, floor),
                 try_entropy(acq, p, Weighting::energy, floor)};
    if (e.s_ref && e.s_acq) {
      sr.add(*e.s_ref);
      sa.add(*e.s_acq);
      ++used;
    }
    rep.scales.push_back(e);
  }
  if (used == 0) throw EmptyAuditError("no scale has a window above the energy floor");
  auto scales_kept = std::move(rep.scales);
  rep = make_report(sr.value() / static_cast<double>(used), sa.value() / static_cast<double>(used));
  rep.scales = std::move(scales_kept);
  return rep;
}

}  // namespace

DeltaSReport delta_s(const Grid2C& reference, const Grid2C& acquired, const HusimiParams& p, Weighting w,
                     double floor) {
  return delta_s_impl(reference, acquired, p, w, floor);
}
DeltaSReport delta_s(const Grid2R& reference, const Grid2R& acquired, const HusimiParams& p, Weighting w,
                     double floor) {
  return delta_s_impl(reference, acquired, p, w, floor);
}

std::vector<Scale> default_scale_ladder(std::size_t rows, std::size_t cols) {
  std::vector<Scale> out;
  const std::size_t lim = std::min(rows, cols);
  for (std::size_t W : {32u, 48u, 64u, 96u, 128u, 192u, 256u})
    if (W <= lim) out.push_back({W, static_cast<double>(W) / 6.0});
  return out;
}

DeltaSReport multiscale_delta_s(const Grid2C& reference, const Grid2C& acquired, const std::vector<Scale>& scales,
                                double hop_ratio, double floor) {
  return multiscale_impl(reference, acquired, scales, hop_ratio, floor);
}
DeltaSReport multiscale_delta_s(const Grid2R& reference, const Grid2R& acquired, const std::vector<Scale>& scales,
                                double hop_ratio, double floor) {
  return multiscale_impl(reference, acquired, scales, hop_ratio, floor);
}

std::vector<double> comparative_advantage(std::span<const double> a, std::span<const double> b,
                                          Orientation orientation, bool minmax_normalize) {
  if (a.size() != b.size()) throw ParameterError("comparative_advantage: length mismatch");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = orientation == Orientation::lower_better ? a[i] - b[i] : b[i] - a[i];
  if (minmax_normalize && !out.empty()) {
    const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
    const double l = *lo, range = *hi - *lo;
    for (auto& v : out) v = range > 0.0 ? (v - l) / range : 0.0;
  }
  return out;
}

}  // namespace phasegate
