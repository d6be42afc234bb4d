// SPDX-License-Identifier: Apache-2.0
// Executable checks of the phase-space theory: discrete Wigner, product-convolution, folding,
// Jensen mixing, Bernoulli concentration, and periodic-vs-random ordering studies.
#pragma once

#include <functional>
#include <vector>

#include "phasegate/masks.hpp"
#include "phasegate/numerics.hpp"
#include "phasegate/phase_space.hpp"

namespace phasegate::oracle {

struct DiscreteWigner1D {
  std::size_t n = 0;
  std::vector<double> values;  // n x n, values[x*n + k]
  double max_imag = 0.0;       // largest discarded imaginary part
  double operator()(std::size_t x, std::size_t k) const { return values[x * n + k]; }
};

// W(x,k) = sum_xi I(x+xi) conj(I(x-xi)) exp(-j 4 pi k xi / n), indices mod n, n odd.
DiscreteWigner1D wigner1d(std::span<const cplx> signal);

double check_product_convolution(std::span<const cplx> mask, std::span<const cplx> signal);
double check_folding_identity(std::span<const cplx> signal, std::size_t q);

struct JensenResult {
  double lhs = 0.0;  // H(sum w r)
  double rhs = 0.0;  // sum w H(r)
  bool strict = false;
};
JensenResult check_jensen_mixture(const std::vector<std::vector<double>>& spectra, std::span<const double> weights);

using FieldGenerator = std::function<Grid2R(std::size_t rows, std::size_t cols, Rng& rng)>;

struct ConcentrationCurve {
  std::vector<std::size_t> ns;
  std::vector<double> l1_means;     // E||rho_J - rho_I||_1 / ||rho_I||_1
  std::vector<double> fluct_means;  // same, measured from the Bernoulli expectation
  double fitted_slope = 0.0;
  double fluct_slope = 0.0;
};

// rho is the window-averaged unnormalized Husimi spectrum; masks are Bernoulli(keep_prob)/sqrt(keep_prob).
// The grid side for N windows is (sqrt(N)-1)*hop + win.
ConcentrationCurve concentration_experiment(const FieldGenerator& gen, double keep_prob, const HusimiParams& p,
                                            const std::vector<std::size_t>& ns, std::size_t trials,
                                            std::uint64_t seed);

struct PairedTest {
  double mean_diff = 0.0;
  double t = 0.0;
  double p_two_sided = 1.0;
  std::size_t n = 0;
};
// Paired Student t test on a - b.
PairedTest paired_t_test(std::span<const double> a, std::span<const double> b);

// Periodic-vs-random ordering on one field: delta S of a periodic q-lattice patch mask and of a
// random patch mask with the same number of kept patches. patch_px = 1 masks single pixels.
struct OrderingSample {
  double delta_periodic = 0.0;
  double delta_random = 0.0;
};
OrderingSample ordering_sample(const Grid2R& field, std::size_t q, std::size_t patch_px, const HusimiParams& p,
                               Weighting w, std::uint64_t mask_seed);

// A field supported on the q-lattice only: periodic q-masking leaves it unchanged.
Grid2R lattice_invariant_field(std::size_t rows, std::size_t cols, std::size_t q, Rng& rng);

}  // namespace phasegate::oracle
