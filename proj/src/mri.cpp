// SPDX-License-Identifier: Apache-2.0
#include "phasegate/mri.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace phasegate::mri {

void MultiCoilKSpace::validate() const {
  if (coils.empty()) throw ParameterError("k-space has no coils");
  for (const auto& c : coils)
    if (!c.same_shape(coils.front())) throw ParameterError("coil grids differ in shape");
}

Grid2R rss_magnitude(const MultiCoilKSpace& k) {
  k.validate();
  Grid2R acc(k.rows(), k.cols(), 0.0);
  for (const auto& coil : k.coils) {
    const Grid2C img = dft2_centered(coil, true);
    for (std::size_t i = 0; i < img.size(); ++i) acc[i] += std::norm(img[i]);
  }
  for (auto& v : acc.data()) v = std::sqrt(v);
  return acc;
}

MagnitudeImage rss_reconstruct(const MultiCoilKSpace& k, std::optional<double> reference_norm) {
  MagnitudeImage out{rss_magnitude(k), 0.0};
  double norm = 0.0;
  if (reference_norm) {
    norm = *reference_norm;
  } else {
    for (double v : out.grid.data()) norm = std::max(norm, v);
  }
  if (!(norm > 0.0) || !std::isfinite(norm)) throw DegenerateError("cannot normalize an all-zero image");
  for (auto& v : out.grid.data()) v /= norm;
  out.norm_factor = norm;
  return out;
}

MultiCoilKSpace mask_kspace(const MultiCoilKSpace& k, const Mask& m) {
  k.validate();
  MultiCoilKSpace out;
  out.coils.reserve(k.coils.size());
  for (const auto& c : k.coils) out.coils.push_back(apply_mask(c, m));
  return out;
}

MagnitudeImage zero_fill(const MultiCoilKSpace& k, const Mask& m, double reference_norm) {
  return rss_reconstruct(mask_kspace(k, m), reference_norm);
}

double psnr(const Grid2R& a, const Grid2R& b, double peak) {
  if (!a.same_shape(b)) throw ParameterError("psnr: shape mismatch");
  KahanSum s;
  for (std::size_t i = 0; i < a.size(); ++i) s.add((a[i] - b[i]) * (a[i] - b[i]));
  const double mse = s.value() / static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double serialized_psnr(double db) { return std::min(db, kPsnrCap); }

namespace {

constexpr std::size_t kSsimWin = 11;

std::array<double, kSsimWin> ssim_kernel() {
  std::array<double, kSsimWin> k{};
  double s = 0.0;
  for (std::size_t i = 0; i < kSsimWin; ++i) {
    const double u = static_cast<double>(i) - 5.0;
    k[i] = std::exp(-u * u / (2.0 * 1.5 * 1.5));
    s += k[i];
  }
  for (auto& v : k) v /= s;
  return k;
}

// Separable 'valid' filtering.
Grid2R filter_valid(const Grid2R& g, const std::array<double, kSsimWin>& k) {
  const std::size_t R = g.rows(), C = g.cols();
  const std::size_t oc = C - kSsimWin + 1, orr = R - kSsimWin + 1;
  Grid2R tmp(R, oc);
  for (std::size_t r = 0; r < R; ++r)
    for (std::size_t c = 0; c < oc; ++c) {
      double s = 0.0;
      for (std::size_t t = 0; t < kSsimWin; ++t) s += k[t] * g(r, c + t);
      tmp(r, c) = s;
    }
  Grid2R out(orr, oc);
  for (std::size_t r = 0; r < orr; ++r)
    for (std::size_t c = 0; c < oc; ++c) {
      double s = 0.0;
      for (std::size_t t = 0; t < kSsimWin; ++t) s += k[t] * tmp(r + t, c);
      out(r, c) = s;
    }
  return out;
}

}  // namespace

double ssim(const Grid2R& a, const Grid2R& b) {
  if (!a.same_shape(b)) throw ParameterError("ssim: shape mismatch");
  if (a.rows() < kSsimWin || a.cols() < kSsimWin) throw ParameterError("ssim: image smaller than the 11x11 window");
  const auto k = ssim_kernel();
  Grid2R aa(a.rows(), a.cols()), bb(a.rows(), a.cols()), ab(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const Grid2R ma = filter_valid(a, k), mb = filter_valid(b, k);
  const Grid2R saa = filter_valid(aa, k), sbb = filter_valid(bb, k), sab = filter_valid(ab, k);
  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  KahanSum total;
  for (std::size_t i = 0; i < ma.size(); ++i) {
    const double va = saa[i] - ma[i] * ma[i];
    const double vb = sbb[i] - mb[i] * mb[i];
    const double cov = sab[i] - ma[i] * mb[i];
    total.add(((2.0 * ma[i] * mb[i] + c1) * (2.0 * cov + c2)) /
              ((ma[i] * ma[i] + mb[i] * mb[i] + c1) * (va + vb + c2)));
  }
  return total.value() / static_cast<double>(ma.size());
}

double kspace_l2(const MultiCoilKSpace& k_full, const Mask& m) {
  k_full.validate();
  KahanSum lost, all;
  for (const auto& coil : k_full.coils) {
    if (!coil.same_shape(m.grid())) throw ParameterError("kspace_l2: mask shape mismatch");
    for (std::size_t i = 0; i < coil.size(); ++i) {
      const double e = std::norm(coil[i]);
      all.add(e);
      if (!m.grid()[i]) lost.add(e);
    }
  }
  if (!(all.value() > 0.0)) throw DegenerateError("kspace_l2: reference has zero energy");
  return std::sqrt(lost.value() / all.value());
}

// --- phantom ---------------------------------------------------------------

namespace {

struct Ellipse {
  double amp, a, b, x0, y0, deg;
};

// Modified Shepp-Logan.
constexpr std::array<Ellipse, 10> kSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
    {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
    {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
    {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
    {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
    {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
    {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
    {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
}};

double axis_coord(std::size_t i, std::size_t n) {
  return (static_cast<double>(i) - static_cast<double>(n) / 2.0) / (static_cast<double>(n) / 2.0);
}

// DFT bin index folded to (-n/2, n/2].
double signed_index(std::size_t i, std::size_t n) {
  return i <= (n - 1) / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
}

}  // namespace

std::vector<Grid2C> phantom_coil_images(std::size_t rows, std::size_t cols, std::size_t coils, std::uint64_t seed,
                                        const PhantomOptions& opt) {
  if (rows < 32 || cols < 32) throw ParameterError("phantom needs at least 32x32 pixels");
  if (coils < 1) throw ParameterError("phantom needs at least one coil");
  Rng rng(seed);
  Grid2R img(rows, cols, 0.0);
  for (Ellipse e : kSheppLogan) {
    e.a *= 1.0 + 0.08 * opt.jitter * (2.0 * rng.uniform() - 1.0);
    e.b *= 1.0 + 0.08 * opt.jitter * (2.0 * rng.uniform() - 1.0);
    e.x0 += 0.03 * opt.jitter * (2.0 * rng.uniform() - 1.0);
    e.y0 += 0.03 * opt.jitter * (2.0 * rng.uniform() - 1.0);
    e.deg += 5.0 * opt.jitter * (2.0 * rng.uniform() - 1.0);
    const double t = e.deg * std::numbers::pi / 180.0;
    const double ct = std::cos(t), st = std::sin(t);
    for (std::size_t r = 0; r < rows; ++r) {
      const double y = axis_coord(r, rows) - e.y0;
      for (std::size_t c = 0; c < cols; ++c) {
        const double x = axis_coord(c, cols) - e.x0;
        const double xr = x * ct + y * st, yr = -x * st + y * ct;
        if ((xr / e.a) * (xr / e.a) + (yr / e.b) * (yr / e.b) <= 1.0) img(r, c) += e.amp;
      }
    }
  }

  // Smooth random phase: Gaussian low-pass of white noise, rescaled to phase_std.
  Grid2R phase(rows, cols, 0.0);
  if (opt.phase_std > 0.0) {
    Grid2C w(rows, cols);
    for (auto& v : w.data()) v = rng.gauss();
    Grid2C f = dft2(w);
    for (std::size_t r = 0; r < rows; ++r) {
      const double ky = signed_index(r, rows);
      for (std::size_t c = 0; c < cols; ++c) {
        const double kx = signed_index(c, cols);
        const double kr = std::hypot(kx, ky) / opt.phase_cutoff;
        f(r, c) *= std::exp(-kr * kr);
      }
    }
    phase = real_part(dft2(f, true));
    const double m = mean(phase.data());
    KahanSum ss;
    for (double v : phase.data()) ss.add((v - m) * (v - m));
    const double sd = std::sqrt(ss.value() / static_cast<double>(phase.size()));
    for (auto& v : phase.data()) v *= opt.phase_std / std::max(sd, 1e-12);
  }

  std::vector<Grid2C> out;
  for (std::size_t k = 0; k < coils; ++k) {
    const double ang = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(coils);
    const double ux = std::cos(ang), uy = std::sin(ang);
    Grid2C g(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      const double y = axis_coord(r, rows);
      for (std::size_t c = 0; c < cols; ++c) {
        const double x = axis_coord(c, cols);
        const double d = ux * x + uy * y;
        const double mag = 1.0 + 0.6 * d + 0.2 * d * d;
        const double sens_phase = 0.5 * d + 0.3 * (-uy * x + ux * y);
        g(r, c) = img(r, c) * mag * std::polar(1.0, sens_phase + phase(r, c));
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

MultiCoilKSpace phantom(std::size_t rows, std::size_t cols, std::size_t coils, std::uint64_t seed,
                        const PhantomOptions& opt) {
  const auto images = phantom_coil_images(rows, cols, coils, seed, opt);
  MultiCoilKSpace k;
  Rng noise(derive_seed(seed, 0x6e6f697365ULL));
  for (const auto& img : images) {
    Grid2C kc = dft2_centered(img);
    if (opt.noise_std > 0.0)
      for (auto& v : kc.data()) v += opt.noise_std * noise.complex_gauss();
    k.coils.push_back(std::move(kc));
  }
  return k;
}

MriMetrics evaluate_mask(const MultiCoilKSpace& k_full, const MagnitudeImage& reference, const Mask& m,
                         const HusimiParams& p, Weighting w) {
  const MagnitudeImage zf = zero_fill(k_full, m, reference.norm_factor);
  MriMetrics out;
  out.psnr_db = psnr(reference.grid, zf.grid);
  out.ssim = ssim(reference.grid, zf.grid);
  out.kspace_l2 = kspace_l2(k_full, m);
  const auto d = delta_s(reference.grid, zf.grid, p, w);
  out.delta_s = d.delta;
  out.abs_delta_s = d.abs_delta;
  return out;
}

}  // namespace phasegate::mri
