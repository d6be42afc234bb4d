// SPDX-License-Identifier: Apache-2.0
// Multi-coil Cartesian MRI emulation: RSS images, zero-filling, image metrics, synthetic phantoms.
#pragma once

#include <optional>
#include <vector>

#include "phasegate/masks.hpp"
#include "phasegate/numerics.hpp"
#include "phasegate/phase_space.hpp"

namespace phasegate::mri {

struct MultiCoilKSpace {
  std::vector<Grid2C> coils;  // centred k-space per coil

  std::size_t rows() const { return coils.front().rows(); }
  std::size_t cols() const { return coils.front().cols(); }
  void validate() const;
};

struct MagnitudeImage {
  Grid2R grid;
  double norm_factor = 1.0;
};

inline constexpr double kPsnrCap = 200.0;

struct MriMetrics {
  double psnr_db = 0.0;  // +inf for identical images
  double ssim = 1.0;
  double kspace_l2 = 0.0;
  double delta_s = 0.0;
  double abs_delta_s = 0.0;
};

// Normalizes by reference_norm when given, otherwise by the image's own maximum.
MagnitudeImage rss_reconstruct(const MultiCoilKSpace& k, std::optional<double> reference_norm = std::nullopt);
// Unnormalized RSS magnitude.
Grid2R rss_magnitude(const MultiCoilKSpace& k);
MagnitudeImage zero_fill(const MultiCoilKSpace& k, const Mask& m, double reference_norm);
MultiCoilKSpace mask_kspace(const MultiCoilKSpace& k, const Mask& m);

double psnr(const Grid2R& a, const Grid2R& b, double peak = 1.0);
double ssim(const Grid2R& a, const Grid2R& b);
double kspace_l2(const MultiCoilKSpace& k_full, const Mask& m);
// Clamp +inf to the serialization cap.
double serialized_psnr(double db);

struct PhantomOptions {
  double noise_std = 0.02;   // complex k-space noise, E|n|^2 = noise_std^2
  double phase_std = 1.5;    // radians, smooth random image phase
  double phase_cutoff = 4.0; // Gaussian low-pass width in cycles per field of view
  double jitter = 1.0;       // scales the per-seed ellipse perturbations
};

// Noiseless complex coil images (image domain).
std::vector<Grid2C> phantom_coil_images(std::size_t rows, std::size_t cols, std::size_t coils, std::uint64_t seed,
                                        const PhantomOptions& opt = {});
MultiCoilKSpace phantom(std::size_t rows, std::size_t cols, std::size_t coils, std::uint64_t seed,
                        const PhantomOptions& opt = {});

// Zero-fill with m and score against the fully sampled reference.
// The entropy audit uses uniform weighting on the magnitude images.
MriMetrics evaluate_mask(const MultiCoilKSpace& k_full, const MagnitudeImage& reference, const Mask& m,
                         const HusimiParams& p, Weighting w = Weighting::uniform);

}  // namespace phasegate::mri
