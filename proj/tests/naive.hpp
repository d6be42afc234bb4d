// SPDX-License-Identifier: Apache-2.0
// Straight-from-the-definition reference implementations used only by tests.
#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "phasegate/numerics.hpp"

namespace naive {

using phasegate::cplx;
using phasegate::Grid2C;
using phasegate::Grid2R;

// Orthonormal 2D DFT, zero frequency at (0,0).
inline Grid2C dft2(const Grid2C& g, bool inverse = false) {
  const std::size_t R = g.rows(), C = g.cols();
  const double sgn = inverse ? 1.0 : -1.0;
  Grid2C out(R, C);
  for (std::size_t kr = 0; kr < R; ++kr)
    for (std::size_t kc = 0; kc < C; ++kc) {
      cplx acc = 0.0;
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < C; ++c) {
          const double ph = sgn * 2.0 * std::numbers::pi *
                            (static_cast<double>(kr * r) / static_cast<double>(R) +
                             static_cast<double>(kc * c) / static_cast<double>(C));
          acc += g(r, c) * std::polar(1.0, ph);
        }
      out(kr, kc) = acc / std::sqrt(static_cast<double>(R * C));
    }
  return out;
}

// Centred transform written with explicitly offset indices rather than shifts.
inline Grid2C dft2_centered(const Grid2C& g, bool inverse = false) {
  const auto R = static_cast<long>(g.rows()), C = static_cast<long>(g.cols());
  const double sgn = inverse ? 1.0 : -1.0;
  Grid2C out(g.rows(), g.cols());
  for (long kr = 0; kr < R; ++kr)
    for (long kc = 0; kc < C; ++kc) {
      cplx acc = 0.0;
      for (long r = 0; r < R; ++r)
        for (long c = 0; c < C; ++c) {
          const double ph = sgn * 2.0 * std::numbers::pi *
                            (static_cast<double>((kr - R / 2) * (r - R / 2)) / static_cast<double>(R) +
                             static_cast<double>((kc - C / 2) * (c - C / 2)) / static_cast<double>(C));
          acc += g(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) * std::polar(1.0, ph);
        }
      out(static_cast<std::size_t>(kr), static_cast<std::size_t>(kc)) = acc / std::sqrt(static_cast<double>(R * C));
    }
  return out;
}

inline std::vector<cplx> dft1(const std::vector<cplx>& x) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n));
    out[k] = acc / std::sqrt(static_cast<double>(n));
  }
  return out;
}

// Gaussian weight evaluated directly, 2D, energy normalized over the whole window.
inline std::vector<double> window2(std::size_t w, double sigma) {
  std::vector<double> g(w * w);
  double ss = 0.0;
  const double c = (static_cast<double>(w) - 1.0) / 2.0;
  for (std::size_t r = 0; r < w; ++r)
    for (std::size_t q = 0; q < w; ++q) {
      const double dr = static_cast<double>(r) - c, dq = static_cast<double>(q) - c;
      g[r * w + q] = std::exp(-(dr * dr + dq * dq) / (2.0 * sigma * sigma));
      ss += g[r * w + q] * g[r * w + q];
    }
  for (auto& v : g) v /= std::sqrt(ss);
  return g;
}

// Per-window power spectra over all bins, window origins on the hop lattice.
inline std::vector<std::vector<double>> spectrogram(const Grid2C& f, std::size_t win, double sigma, std::size_t hop) {
  const auto g = window2(win, sigma);
  std::vector<std::vector<double>> out;
  for (std::size_t r0 = 0; r0 + win <= f.rows(); r0 += hop)
    for (std::size_t c0 = 0; c0 + win <= f.cols(); c0 += hop) {
      Grid2C patch(win, win);
      for (std::size_t r = 0; r < win; ++r)
        for (std::size_t c = 0; c < win; ++c) patch(r, c) = g[r * win + c] * f(r0 + r, c0 + c);
      const Grid2C s = naive::dft2(patch);
      std::vector<double> p(win * win);
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(s[i]);
      out.push_back(p);
    }
  return out;
}

// Global band entropy: -sum p log p per window, uniform or energy weighted, floor 1e-6.
inline double entropy(const Grid2C& f, std::size_t win, double sigma, std::size_t hop, bool energy_weighted) {
  double num = 0.0, den = 0.0;
  for (const auto& p : spectrogram(f, win, sigma, hop)) {
    double e = 0.0;
    for (double v : p) e += v;
    if (!(e > 1e-6)) continue;
    double h = 0.0;
    for (double v : p)
      if (v > 0.0) h -= (v / e) * std::log(v / e);
    const double w = energy_weighted ? e : 1.0;
    num += w * h;
    den += w;
  }
  return num / den;
}

inline double mse(const Grid2R& a, const Grid2R& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

// SSIM with explicit 11x11 Gaussian window sums at every valid position.
inline double ssim(const Grid2R& a, const Grid2R& b) {
  double k[11][11];
  double ks = 0.0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) {
      k[i][j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2.0 * 1.5 * 1.5));
      ks += k[i][j];
    }
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r + 11 <= a.rows(); ++r)
    for (std::size_t c = 0; c + 11 <= a.cols(); ++c) {
      double ma = 0, mb = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          ma += k[i][j] / ks * a(r + i, c + j);
          mb += k[i][j] / ks * b(r + i, c + j);
        }
      double va = 0, vb = 0, cov = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          const double da = a(r + i, c + j) - ma, db = b(r + i, c + j) - mb;
          va += k[i][j] / ks * da * da;
          vb += k[i][j] / ks * db * db;
          cov += k[i][j] / ks * da * db;
        }
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++n;
    }
  return total / static_cast<double>(n);
}

}  // namespace naive
