// SPDX-License-Identifier: Apache-2.0
// Dense 2D grids, orthonormal DFTs, Gaussian windows, seeded randomness, small-sample stats.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasegate {

using cplx = std::complex<double>;

// Error taxonomy. The CLI maps IoError to exit 2 and everything else to exit 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SizeError : Error { using Error::Error; };
struct ParameterError : Error { using Error::Error; };
struct DegenerateError : Error { using Error::Error; };
struct EmptyAuditError : Error { using Error::Error; };
struct InfeasibleSpecError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

template <class T>
class Grid2 {
 public:
  Grid2() = default;
  Grid2(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) throw ParameterError("grid dimensions must be >= 1");
    if (rows > data_.max_size() / cols) throw SizeError("grid dimensions overflow");
    data_.assign(rows * cols, fill);
  }
  Grid2(std::size_t rows, std::size_t cols, std::vector<T> data) : Grid2(rows, cols) {
    if (data.size() != rows * cols) throw ParameterError("grid data length does not match shape");
    data_ = std::move(data);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(const Grid2& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  template <class U>
  bool same_shape(const Grid2<U>& o) const { return rows_ == o.rows() && cols_ == o.cols(); }

  friend bool operator==(const Grid2&, const Grid2&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Grid2C = Grid2<cplx>;
using Grid2R = Grid2<double>;

Grid2C to_complex(const Grid2R& g);
Grid2R magnitude(const Grid2C& g);
Grid2R real_part(const Grid2C& g);
double energy(const Grid2C& g);
double max_abs(const Grid2C& g);

// Unnormalized in-place 1D DFT of any length (forward uses exp(-j2πkn/N)).
void fft_inplace(std::span<cplx> x, bool inverse);
// Orthonormal 1D DFT, zero frequency at index 0.
std::vector<cplx> dft(std::span<const cplx> x, bool inverse = false);
// Orthonormal 2D DFT, zero frequency at (0,0).
Grid2C dft2(const Grid2C& g, bool inverse = false);
// Orthonormal 2D DFT with zero frequency at the array centre (fftshift on both axes).
Grid2C dft2_centered(const Grid2C& g, bool inverse = false);
Grid2C fftshift(const Grid2C& g);
Grid2C ifftshift(const Grid2C& g);
Grid2C circshift(const Grid2C& g, std::ptrdiff_t dr, std::ptrdiff_t dc);

// Separable Gaussian window, w(r,c) = axis[r]*axis[c], sum of squares 1.
struct GaussianWindow {
  std::size_t size = 0;
  double sigma = 0.0;
  std::vector<double> axis;
  double operator()(std::size_t r, std::size_t c) const { return axis[r] * axis[c]; }
};
GaussianWindow gaussian_window(std::size_t size, double sigma);

// xoshiro256** seeded through splitmix64.
//   splitmix64: z += 0x9e3779b97f4a7c15; z = (z^(z>>30))*0xbf58476d1ce4e5b9;
//               z = (z^(z>>27))*0x94d049bb133111eb; z ^= z>>31
//   xoshiro256**: out = rotl(s1*5, 7)*9; t = s1<<17; s2^=s0; s3^=s1; s1^=s2;
//                 s0^=s3; s2^=t; s3 = rotl(s3, 45)
// uniform() takes the top 53 bits; gauss() is Box-Muller (cached pair).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t seed() const { return seed_; }
  std::uint64_t next();
  double uniform();
  double gauss();
  cplx complex_gauss();  // E|z|^2 = 1
  double laplace(double scale);
  std::size_t below(std::size_t n);  // uniform in [0, n)
  unsigned poisson(double lambda);
  std::vector<std::size_t> choose_k(std::size_t n, std::size_t k);

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);
// Stream seed for the index-th sample of a batch.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

// Neumaier compensated summation.
class KahanSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double sum(std::span<const double> xs);
double mean(std::span<const double> xs);
double sample_stddev(std::span<const double> xs);
// Linear-interpolated quantile (type 7).
double quantile(std::vector<double> xs, double q);
std::vector<double> ranks(std::span<const double> xs);  // average ranks for ties
double spearman(std::span<const double> xs, std::span<const double> ys);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double pearson_r = 0.0;
  double r_ci_low = -1.0;
  double r_ci_high = 1.0;
  std::size_t n = 0;
};
FitResult ols_pearson(std::span<const double> xs, std::span<const double> ys);

// Zero-mean, unit-variance isotropic noise with power spectrum ~ 1/f^beta (DC removed).
Grid2R power_law_noise(std::size_t rows, std::size_t cols, double beta, Rng& rng);
// White noise through a Lorentzian low-pass, gain 1/(1+(f/f0)^2), f in cycles/pixel.
Grid2R lorentzian_noise(std::size_t rows, std::size_t cols, double f0, Rng& rng);

}  // namespace phasegate
