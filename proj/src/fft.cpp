// SPDX-License-Identifier: Apache-2.0
// Mixed-radix Cooley-Tukey for smooth lengths, Bluestein otherwise.
#include "phasegate/numerics.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <unordered_map>

namespace phasegate {
namespace {

constexpr std::size_t kMaxSmoothFactor = 13;

std::vector<std::size_t> factorize(std::size_t n) {
  std::vector<std::size_t> f;
  for (std::size_t p : {4u, 2u, 3u, 5u}) {
    while (n % p == 0) {
      f.push_back(p);
      n /= p;
    }
  }
  for (std::size_t p = 7; p * p <= n; p += 2) {
    while (n % p == 0) {
      f.push_back(p);
      n /= p;
    }
  }
  if (n > 1) f.push_back(n);
  return f;
}

class Plan {
 public:
  explicit Plan(std::size_t n) : n_(n), factors_(factorize(n)) {
    twiddle_.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
      twiddle_[t] = {std::cos(a), std::sin(a)};
    }
    for (auto p : factors_) smooth_ = smooth_ && p <= kMaxSmoothFactor;
    if (!smooth_) init_bluestein();
    scratch_.resize(n);
  }

  // Forward, unnormalized.
  void forward(cplx* x) {
    if (n_ == 1) return;
    if (smooth_) {
      std::copy(x, x + n_, scratch_.begin());
      recurse(scratch_.data(), 1, x, n_, 0);
    } else {
      bluestein(x);
    }
  }

 private:
  // out[0..n) = DFT of in[0], in[stride], ... (n samples). depth indexes factors_.
  void recurse(const cplx* in, std::size_t stride, cplx* out, std::size_t n, std::size_t depth) {
    if (n == 1) {
      out[0] = in[0];
      return;
    }
    const std::size_t p = factors_[depth];
    const std::size_t m = n / p;
    for (std::size_t r = 0; r < p; ++r) recurse(in + r * stride, stride * p, out + r * m, m, depth + 1);
    // Twiddle step: root of unity of order n is twiddle_[n_/n].
    const std::size_t tw = n_ / n;
    cplx small[kMaxSmoothFactor];
    cplx res[kMaxSmoothFactor];
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t r = 0; r < p; ++r) small[r] = out[r * m + k] * twiddle_[(r * k * tw) % n_];
      if (p == 2) {
        res[0] = small[0] + small[1];
        res[1] = small[0] - small[1];
      } else if (p == 4) {
        const cplx a = small[0] + small[2], b = small[0] - small[2];
        const cplx c = small[1] + small[3];
        const cplx d = small[1] - small[3];
        const cplx jd(d.imag(), -d.real());  // -j*d
        res[0] = a + c;
        res[1] = b + jd;
        res[2] = a - c;
        res[3] = b - jd;
      } else {
        const std::size_t tp = n_ / p;
        for (std::size_t q = 0; q < p; ++q) {
          cplx acc = small[0];
          for (std::size_t r = 1; r < p; ++r) acc += small[r] * twiddle_[((r * q) % p) * tp];
          res[q] = acc;
        }
      }
      for (std::size_t q = 0; q < p; ++q) out[q * m + k] = res[q];
    }
  }

  void init_bluestein() {
    std::size_t m = 1;
    while (m < 2 * n_ - 1) m <<= 1;
    inner_ = std::make_unique<Plan>(m);
    chirp_.resize(n_);
    for (std::size_t t = 0; t < n_; ++t) {
      const std::size_t t2 = (t * t) % (2 * n_);
      const double a = -std::numbers::pi * static_cast<double>(t2) / static_cast<double>(n_);
      chirp_[t] = {std::cos(a), std::sin(a)};
    }
    kernel_.assign(m, cplx{});
    kernel_[0] = std::conj(chirp_[0]);
    for (std::size_t t = 1; t < n_; ++t) kernel_[t] = kernel_[m - t] = std::conj(chirp_[t]);
    inner_->forward(kernel_.data());
    work_.resize(m);
  }

  void bluestein(cplx* x) {
    const std::size_t m = work_.size();
    std::fill(work_.begin(), work_.end(), cplx{});
    for (std::size_t t = 0; t < n_; ++t) work_[t] = x[t] * chirp_[t];
    inner_->forward(work_.data());
    for (std::size_t t = 0; t < m; ++t) work_[t] = std::conj(work_[t] * kernel_[t]);
    inner_->forward(work_.data());  // conj-forward-conj gives the inverse
    const double s = 1.0 / static_cast<double>(m);
    for (std::size_t t = 0; t < n_; ++t) x[t] = std::conj(work_[t]) * s * chirp_[t];
  }

  std::size_t n_;
  std::vector<std::size_t> factors_;
  std::vector<cplx> twiddle_;
  bool smooth_ = true;
  std::vector<cplx> scratch_;
  std::unique_ptr<Plan> inner_;
  std::vector<cplx> chirp_, kernel_, work_;
};

Plan& plan_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<Plan>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Plan>(n);
  return *slot;
}

}  // namespace

void fft_inplace(std::span<cplx> x, bool inverse) {
  if (x.empty()) return;
  Plan& plan = plan_for(x.size());
  if (!inverse) {
    plan.forward(x.data());
    return;
  }
  for (auto& v : x) v = std::conj(v);
  plan.forward(x.data());
  for (auto& v : x) v = std::conj(v);
}

std::vector<cplx> dft(std::span<const cplx> x, bool inverse) {
  std::vector<cplx> out(x.begin(), x.end());
  fft_inplace(out, inverse);
  const double s = 1.0 / std::sqrt(static_cast<double>(out.size()));
  for (auto& v : out) v *= s;
  return out;
}

Grid2C dft2(const Grid2C& g, bool inverse) {
  Grid2C out = g;
  const std::size_t R = g.rows(), C = g.cols();
  auto& d = out.data();
  for (std::size_t r = 0; r < R; ++r) fft_inplace(std::span<cplx>(d.data() + r * C, C), inverse);
  if (R > 1) {
    std::vector<cplx> col(R);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t r = 0; r < R; ++r) col[r] = d[r * C + c];
      fft_inplace(col, inverse);
      for (std::size_t r = 0; r < R; ++r) d[r * C + c] = col[r];
    }
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(R * C));
  for (auto& v : d) v *= s;
  return out;
}

Grid2C circshift(const Grid2C& g, std::ptrdiff_t dr, std::ptrdiff_t dc) {
  const auto R = static_cast<std::ptrdiff_t>(g.rows()), C = static_cast<std::ptrdiff_t>(g.cols());
  Grid2C out(g.rows(), g.cols());
  for (std::ptrdiff_t r = 0; r < R; ++r) {
    const std::ptrdiff_t rr = ((r + dr) % R + R) % R;
    for (std::ptrdiff_t c = 0; c < C; ++c) {
      const std::ptrdiff_t cc = ((c + dc) % C + C) % C;
      out(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc)) =
          g(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    }
  }
  return out;
}

Grid2C fftshift(const Grid2C& g) {
  return circshift(g, static_cast<std::ptrdiff_t>(g.rows() / 2), static_cast<std::ptrdiff_t>(g.cols() / 2));
}

Grid2C ifftshift(const Grid2C& g) {
  return circshift(g, -static_cast<std::ptrdiff_t>(g.rows() / 2), -static_cast<std::ptrdiff_t>(g.cols() / 2));
}

Grid2C dft2_centered(const Grid2C& g, bool inverse) { return fftshift(dft2(ifftshift(g), inverse)); }

}  // namespace phasegate
