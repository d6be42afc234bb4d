// SPDX-License-Identifier: Apache-2.0
// Gaussian-windowed spectrogram (Husimi density), band entropy and its change under acquisition.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phasegate/numerics.hpp"

namespace phasegate {

struct HusimiParams {
  std::size_t win = 32;
  double sigma = 16.0;
  std::size_t hop = 10;
  // Flat bin indices r*win + c into the win x win DFT; empty means every bin.
  std::vector<std::size_t> band;

  static HusimiParams mri() { return {32, 16.0, 10, {}}; }
  static HusimiParams mimo() { return {4, 1.0, 1, {}}; }

  void validate() const;
  std::size_t band_size() const { return band.empty() ? win * win : band.size(); }
};

enum class Weighting { uniform, energy };
std::string to_string(Weighting w);
Weighting weighting_from_string(const std::string& s);

inline constexpr double kDefaultEnergyFloor = 1e-6;

struct WindowPos {
  std::size_t row = 0;  // top-left corner
  std::size_t col = 0;
};

struct PhaseSpaceDensity {
  HusimiParams params;
  std::vector<WindowPos> centers;
  std::size_t band_size = 0;
  std::vector<double> spectra;   // centers.size() x band_size, row-major
  std::vector<double> energies;  // row sums before normalization
  std::vector<bool> excluded;    // set by band_normalize
  bool normalized = false;

  std::span<const double> spectrum(std::size_t i) const {
    return {spectra.data() + i * band_size, band_size};
  }
};

struct EntropyResult {
  std::vector<double> local;  // NaN for excluded centers
  double global = 0.0;
  Weighting weighting = Weighting::uniform;
  HusimiParams params;
};

struct ScaleEntry {
  std::size_t win = 0;
  double sigma = 0.0;
  std::size_t hop = 0;
  std::optional<double> s_ref;
  std::optional<double> s_acq;
};

struct DeltaSReport {
  double s_ref = 0.0;
  double s_acq = 0.0;
  double delta = 0.0;
  double abs_delta = 0.0;
  std::vector<ScaleEntry> scales;
};

PhaseSpaceDensity husimi(const Grid2C& field, const HusimiParams& p);
PhaseSpaceDensity husimi(const Grid2R& field, const HusimiParams& p);
PhaseSpaceDensity band_normalize(PhaseSpaceDensity d, double energy_floor = kDefaultEnergyFloor);
EntropyResult band_entropy(const PhaseSpaceDensity& d_normalized, Weighting weighting);

// Plug-in Shannon entropy in nats of a probability vector (0 log 0 = 0).
double shannon_entropy(std::span<const double> p);

// Global band entropy of a field in one call.
double global_entropy(const Grid2C& field, const HusimiParams& p, Weighting w,
                      double energy_floor = kDefaultEnergyFloor);

DeltaSReport delta_s(const Grid2C& reference, const Grid2C& acquired, const HusimiParams& p,
                     Weighting weighting, double energy_floor = kDefaultEnergyFloor);
DeltaSReport delta_s(const Grid2R& reference, const Grid2R& acquired, const HusimiParams& p,
                     Weighting weighting, double energy_floor = kDefaultEnergyFloor);

struct Scale {
  std::size_t win = 0;
  double sigma = 0.0;
};

// W in {32,48,64,96,128,192,256} that fit min(rows, cols), sigma = W/6.
std::vector<Scale> default_scale_ladder(std::size_t rows, std::size_t cols);

// Energy-weighted entropy per scale, averaged over the scales defined for each field.
// hop = max(1, round(win * hop_ratio)).
DeltaSReport multiscale_delta_s(const Grid2C& reference, const Grid2C& acquired, const std::vector<Scale>& scales,
                                double hop_ratio = 1.0, double energy_floor = kDefaultEnergyFloor);
DeltaSReport multiscale_delta_s(const Grid2R& reference, const Grid2R& acquired, const std::vector<Scale>& scales,
                                double hop_ratio = 1.0, double energy_floor = kDefaultEnergyFloor);

enum class Orientation { lower_better, higher_better };

// Per-sample advantage of B over A.
std::vector<double> comparative_advantage(std::span<const double> a, std::span<const double> b,
                                          Orientation orientation, bool minmax_normalize = false);

}  // namespace phasegate
