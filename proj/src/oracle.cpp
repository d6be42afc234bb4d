// SPDX-License-Identifier: Apache-2.0
#include "phasegate/oracle.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

namespace phasegate::oracle {

DiscreteWigner1D wigner1d(std::span<const cplx> signal) {
  const std::size_t n = signal.size();
  if (n < 3 || n % 2 == 0) throw ParameterError("wigner1d needs an odd length >= 3");
  DiscreteWigner1D w{n, std::vector<double>(n * n), 0.0};
  std::vector<cplx> r(n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t xi = 0; xi < n; ++xi) r[xi] = signal[(x + xi) % n] * std::conj(signal[(x + n - xi) % n]);
    fft_inplace(r, false);
    // exp(-j 4 pi k xi / n) is bin 2k of the length-n DFT.
    for (std::size_t k = 0; k < n; ++k) {
      const cplx v = r[(2 * k) % n];
      w.values[x * n + k] = v.real();
      w.max_imag = std::max(w.max_imag, std::abs(v.imag()));
    }
  }
  return w;
}

double check_product_convolution(std::span<const cplx> mask, std::span<const cplx> signal) {
  if (mask.size() != signal.size()) throw ParameterError("mask and signal lengths differ");
  const std::size_t n = signal.size();
  std::vector<cplx> j(n);
  for (std::size_t i = 0; i < n; ++i) j[i] = mask[i] * signal[i];
  const auto wj = wigner1d(j), wm = wigner1d(mask), wi = wigner1d(signal);
  double err = 0.0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t k = 0; k < n; ++k) {
      double conv = 0.0;
      for (std::size_t q = 0; q < n; ++q) conv += wm(x, q) * wi(x, (k + n - q) % n);
      err = std::max(err, std::abs(wj(x, k) - conv / static_cast<double>(n)));
    }
  return err;
}

double check_folding_identity(std::span<const cplx> signal, std::size_t q) {
  const std::size_t n = signal.size();
  if (n == 0 || q == 0 || n % q != 0) throw ParameterError("folding period must divide the signal length");
  std::vector<cplx> masked(signal.begin(), signal.end());
  for (std::size_t x = 0; x < n; ++x)
    if (x % q != 0) masked[x] = 0.0;
  const auto lhs = dft(masked);
  const auto full = dft(signal);
  const std::size_t shift = n / q;
  double err = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::size_t m = 0; m < q; ++m) acc += full[(k + n - (m * shift) % n) % n];
    err = std::max(err, std::abs(lhs[k] - acc / static_cast<double>(q)));
  }
  return err;
}

JensenResult check_jensen_mixture(const std::vector<std::vector<double>>& spectra, std::span<const double> weights) {
  if (spectra.empty() || spectra.size() != weights.size()) throw ParameterError("need one weight per spectrum");
  const std::size_t len = spectra.front().size();
  KahanSum wsum;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ParameterError("weights must be nonnegative");
    wsum.add(w);
  }
  if (std::abs(wsum.value() - 1.0) > 1e-9) throw ParameterError("weights must sum to 1");
  for (const auto& s : spectra) {
    if (s.size() != len) throw ParameterError("spectra differ in length");
    if (std::any_of(s.begin(), s.end(), [](double v) { return !(v >= 0.0); }))
      throw ParameterError("spectra must be nonnegative");
    if (std::abs(sum(s) - 1.0) > 1e-9) throw ParameterError("each spectrum must sum to 1");
  }
  std::vector<double> mix(len, 0.0);
  JensenResult res;
  KahanSum rhs;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    for (std::size_t k = 0; k < len; ++k) mix[k] += weights[i] * spectra[i][k];
    rhs.add(weights[i] * shannon_entropy(spectra[i]));
  }
  res.lhs = shannon_entropy(mix);
  res.rhs = rhs.value();
  for (std::size_t i = 1; i < spectra.size() && !res.strict; ++i)
    for (std::size_t k = 0; k < len; ++k)
      if (std::abs(spectra[i][k] - spectra[0][k]) > 1e-12) {
        res.strict = true;
        break;
      }
  return res;
}

namespace {

std::vector<double> mean_spectrum(const PhaseSpaceDensity& d) {
  std::vector<double> m(d.band_size, 0.0);
  for (std::size_t i = 0; i < d.centers.size(); ++i) {
    const auto s = d.spectrum(i);
    for (std::size_t b = 0; b < d.band_size; ++b) m[b] += s[b];
  }
  for (auto& v : m) v /= static_cast<double>(d.centers.size());
  return m;
}

double loglog_slope(const std::vector<std::size_t>& ns, const std::vector<double>& ys) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    lx.push_back(std::log(static_cast<double>(ns[i])));
    ly.push_back(std::log(std::max(ys[i], 1e-300)));
  }
  return ols_pearson(lx, ly).slope;
}

}  // namespace

ConcentrationCurve concentration_experiment(const FieldGenerator& gen, double keep_prob, const HusimiParams& p,
                                            const std::vector<std::size_t>& ns, std::size_t trials,
                                            std::uint64_t seed) {
  if (!(keep_prob > 0.0 && keep_prob < 1.0)) throw ParameterError("keep_prob must lie in (0, 1)");
  if (ns.size() < 2 || trials < 1) throw ParameterError("need at least two sizes and one trial");
  for (std::size_t i = 1; i < ns.size(); ++i)
    if (ns[i] <= ns[i - 1]) throw ParameterError("ns must be strictly increasing");
  p.validate();
  HusimiParams full = p;
  full.band.clear();
  const double scale = 1.0 / std::sqrt(keep_prob);
  ConcentrationCurve curve;
  curve.ns = ns;
  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const auto side_windows = static_cast<std::size_t>(std::max(1.0, std::round(std::sqrt(static_cast<double>(ns[ni])))));
    const std::size_t side = (side_windows - 1) * p.hop + p.win;
    KahanSum l1_acc, fl_acc;
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(derive_seed(seed, ni), t));
      const Grid2R field = gen(side, side, rng);
      Grid2R masked = field;
      for (auto& v : masked.data()) v *= rng.uniform() < keep_prob ? scale : 0.0;
      const auto rho_i = mean_spectrum(husimi(field, p));
      const auto rho_j = mean_spectrum(husimi(masked, p));
      // Diagonal (pedestal) term of the Bernoulli expectation: (1-rho) * mean window energy / win^2.
      const auto dens_full = husimi(field, full);
      const double e_mean = mean(dens_full.energies);
      const double pedestal = (1.0 - keep_prob) * e_mean / static_cast<double>(p.win * p.win);
      KahanSum num, den, fl;
      for (std::size_t b = 0; b < rho_i.size(); ++b) {
        num.add(std::abs(rho_j[b] - rho_i[b]));
        fl.add(std::abs(rho_j[b] - (keep_prob * rho_i[b] + pedestal)));
        den.add(rho_i[b]);
      }
      if (!(den.value() > 0.0)) throw DegenerateError("generated field has zero in-band energy");
      l1_acc.add(num.value() / den.value());
      fl_acc.add(fl.value() / den.value());
    }
    curve.l1_means.push_back(l1_acc.value() / static_cast<double>(trials));
    curve.fluct_means.push_back(fl_acc.value() / static_cast<double>(trials));
  }
  curve.fitted_slope = loglog_slope(curve.ns, curve.l1_means);
  curve.fluct_slope = loglog_slope(curve.ns, curve.fluct_means);
  return curve;
}

PairedTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ParameterError("paired test: length mismatch");
  PairedTest res;
  res.n = a.size();
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  if (d.empty()) return res;
  res.mean_diff = mean(d);
  if (d.size() < 2) return res;
  const double se = sample_stddev(d) / std::sqrt(static_cast<double>(d.size()));
  if (!(se > 0.0)) {
    res.t = res.mean_diff == 0.0 ? 0.0 : std::copysign(INFINITY, res.mean_diff);
    res.p_two_sided = res.mean_diff == 0.0 ? 1.0 : 0.0;
    return res;
  }
  res.t = res.mean_diff / se;
  const boost::math::students_t dist(static_cast<double>(d.size() - 1));
  res.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(res.t)));
  return res;
}

OrderingSample ordering_sample(const Grid2R& field, std::size_t q, std::size_t patch_px, const HusimiParams& p,
                               Weighting w, std::uint64_t mask_seed) {
  if (patch_px < 1 || field.rows() % patch_px != 0 || field.cols() % patch_px != 0)
    throw ParameterError("patch size must divide the field");
  PatchMaskSpec per{field.rows() / patch_px, field.cols() / patch_px, patch_px, Geometry::periodic, q, std::nullopt, 0};
  const Mask mp = patch_mask(per);
  PatchMaskSpec rnd = per;
  rnd.geometry = Geometry::random;
  rnd.budget = mp.keep_count() / (patch_px * patch_px);
  rnd.seed = mask_seed;
  const Mask mr = patch_mask(rnd);
  return {delta_s(field, apply_mask(field, mp), p, w).delta, delta_s(field, apply_mask(field, mr), p, w).delta};
}

Grid2R lattice_invariant_field(std::size_t rows, std::size_t cols, std::size_t q, Rng& rng) {
  if (q < 1) throw ParameterError("lattice period must be >= 1");
  Grid2R g(rows, cols, 0.0);
  for (std::size_t r = 0; r < rows; r += q)
    for (std::size_t c = 0; c < cols; c += q) g(r, c) = rng.gauss();
  return g;
}

}  // namespace phasegate::oracle
