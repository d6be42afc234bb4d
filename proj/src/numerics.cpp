// SPDX-License-Identifier: Apache-2.0
#include "phasegate/numerics.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numbers>
#include <numeric>

namespace phasegate {

Grid2C to_complex(const Grid2R& g) {
  Grid2C out(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i];
  return out;
}

Grid2R magnitude(const Grid2C& g) {
  Grid2R out(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::abs(g[i]);
  return out;
}

Grid2R real_part(const Grid2C& g) {
  Grid2R out(g.rows(), g.cols());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i].real();
  return out;
}

double energy(const Grid2C& g) {
  KahanSum s;
  for (const auto& v : g.data()) s.add(std::norm(v));
  return s.value();
}

double max_abs(const Grid2C& g) {
  double m = 0.0;
  for (const auto& v : g.data()) m = std::max(m, std::abs(v));
  return m;
}

GaussianWindow gaussian_window(std::size_t size, double sigma) {
  if (size == 0) throw ParameterError("window size must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("window sigma must be positive");
  GaussianWindow w{size, sigma, std::vector<double>(size)};
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  KahanSum ss;
  for (std::size_t i = 0; i < size; ++i) {
    const double u = static_cast<double>(i) - c;
    w.axis[i] = std::exp(-u * u / (2.0 * sigma * sigma));
    ss.add(w.axis[i] * w.axis[i]);
  }
  const double norm = std::sqrt(ss.value());
  for (auto& v : w.axis) v /= norm;
  return w;
}

// --- Rng -------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t s = base ^ (0xd1b54a32d192ed03ULL * (index + 1));
  splitmix64(s);
  return splitmix64(s);
}

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::gauss() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double th = 2.0 * std::numbers::pi * u2;
  spare_ = rad * std::sin(th);
  have_spare_ = true;
  return rad * std::cos(th);
}

cplx Rng::complex_gauss() {
  const double re = gauss();
  const double im = gauss();
  return cplx(re, im) * (1.0 / std::numbers::sqrt2);
}

double Rng::laplace(double scale) {
  double u = uniform() - 0.5;
  while (u == -0.5) u = uniform() - 0.5;
  return -scale * std::copysign(1.0, u) * std::log(1.0 - 2.0 * std::abs(u));
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw ParameterError("below(0)");
  // Lemire's nearly divisionless method.
  const auto bound = static_cast<std::uint64_t>(n);
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t thresh = (0 - bound) % bound;
    while (low < thresh) {
      m = static_cast<unsigned __int128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

unsigned Rng::poisson(double lambda) {
  if (!(lambda >= 0.0)) throw ParameterError("poisson rate must be >= 0");
  if (lambda == 0.0) return 0;
  if (lambda < 30.0) {
    const double limit = std::exp(-lambda);
    unsigned k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }
  // PTRS (Hormann 1993).
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<unsigned>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -lambda + kf * loglam - std::lgamma(kf + 1.0))
      return static_cast<unsigned>(kf);
  }
}

std::vector<std::size_t> Rng::choose_k(std::size_t n, std::size_t k) {
  if (k > n) throw ParameterError("choose_k: k exceeds n");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + below(n - i)]);
  idx.resize(k);
  return idx;
}

// --- stats -----------------------------------------------------------------

double sum(std::span<const double> xs) {
  KahanSum s;
  for (double v : xs) s.add(v);
  return s.value();
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw DegenerateError("mean of empty list");
  return sum(xs) / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  KahanSum s;
  for (double v : xs) s.add((v - m) * (v - m));
  return std::sqrt(s.value() / static_cast<double>(xs.size() - 1));
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw DegenerateError("quantile of empty list");
  std::sort(xs.begin(), xs.end());
  const double h = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

std::vector<double> ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  return ols_pearson(rx, ry).pearson_r;
}

FitResult ols_pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ParameterError("ols_pearson: length mismatch");
  if (xs.size() < 2) throw ParameterError("ols_pearson: need at least 2 points");
  const double mx = mean(xs), my = mean(ys);
  KahanSum sxx, syy, sxy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx.add(dx * dx);
    syy.add(dy * dy);
    sxy.add(dx * dy);
  }
  if (!(sxx.value() > 0.0)) throw DegenerateError("ols_pearson: xs have zero variance");
  FitResult f;
  f.n = xs.size();
  f.slope = sxy.value() / sxx.value();
  f.intercept = my - f.slope * mx;
  f.pearson_r = syy.value() > 0.0 ? sxy.value() / std::sqrt(sxx.value() * syy.value()) : 0.0;
  f.pearson_r = std::clamp(f.pearson_r, -1.0, 1.0);
  if (f.n <= 3) {
    f.r_ci_low = -1.0;
    f.r_ci_high = 1.0;
  } else if (std::abs(f.pearson_r) >= 1.0) {
    f.r_ci_low = f.r_ci_high = f.pearson_r;
  } else {
    const double z = std::atanh(f.pearson_r);
    const double half = 1.96 / std::sqrt(static_cast<double>(f.n) - 3.0);
    f.r_ci_low = std::tanh(z - half);
    f.r_ci_high = std::tanh(z + half);
  }
  return f;
}

// --- synthetic fields ------------------------------------------------------

namespace {

double signed_freq(std::size_t i, std::size_t n) {
  const auto s = static_cast<double>(i);
  const auto N = static_cast<double>(n);
  return (i <= (n - 1) / 2 ? s : s - N) / N;
}

template <class Gain>
Grid2R filtered_white(std::size_t rows, std::size_t cols, Rng& rng, Gain gain) {
  Grid2C g(rows, cols);
  for (auto& v : g.data()) v = rng.gauss();
  Grid2C f = dft2(g);
  for (std::size_t r = 0; r < rows; ++r) {
    const double fy = signed_freq(r, rows);
    for (std::size_t c = 0; c < cols; ++c) {
      const double fx = signed_freq(c, cols);
      f(r, c) *= gain(std::hypot(fx, fy));
    }
  }
  return real_part(dft2(f, true));
}

void standardize(Grid2R& g) {
  const double m = mean(g.data());
  for (auto& v : g.data()) v -= m;
  KahanSum s;
  for (double v : g.data()) s.add(v * v);
  const double sd = std::sqrt(s.value() / static_cast<double>(g.size()));
  if (sd > 0.0)
    for (auto& v : g.data()) v /= sd;
}

}  // namespace

Grid2R power_law_noise(std::size_t rows, std::size_t cols, double beta, Rng& rng) {
  Grid2R g = filtered_white(rows, cols, rng, [beta](double f) { return f > 0.0 ? std::pow(f, -beta / 2.0) : 0.0; });
  standardize(g);
  return g;
}

Grid2R lorentzian_noise(std::size_t rows, std::size_t cols, double f0, Rng& rng) {
  if (!(f0 > 0.0)) throw ParameterError("lorentzian cutoff must be positive");
  return filtered_white(rows, cols, rng, [f0](double f) { return 1.0 / (1.0 + (f / f0) * (f / f0)); });
}

}  // namespace phasegate
