// SPDX-License-Identifier: Apache-2.0
// Sampling geometries: vision patch masks, MRI phase-encoding line masks, antenna deactivation.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phasegate/numerics.hpp"

namespace phasegate {

class Mask {
 public:
  Mask() = default;
  Mask(std::size_t rows, std::size_t cols, bool fill = false) : kept_(rows, cols, fill ? 1 : 0) {}
  explicit Mask(Grid2<std::uint8_t> kept);

  std::size_t rows() const { return kept_.rows(); }
  std::size_t cols() const { return kept_.cols(); }
  bool kept(std::size_t r, std::size_t c) const { return kept_(r, c) != 0; }
  void set(std::size_t r, std::size_t c, bool v) { kept_(r, c) = v ? 1 : 0; }
  std::size_t keep_count() const;
  const Grid2<std::uint8_t>& grid() const { return kept_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  Grid2<std::uint8_t> kept_;
};

enum class Geometry { periodic, random };
std::string to_string(Geometry g);
Geometry geometry_from_string(const std::string& s);

struct PatchMaskSpec {
  std::size_t patch_rows = 16;
  std::size_t patch_cols = 16;
  std::size_t patch_px = 16;
  Geometry geometry = Geometry::periodic;
  std::size_t interval_k = 2;
  std::optional<std::size_t> budget;  // random only; default ceil(rows*cols/k^2)
  std::uint64_t seed = 0;
};

// Patch count kept by the periodic lattice: ceil(rows/k) * ceil(cols/k).
std::size_t periodic_patch_count(std::size_t patch_rows, std::size_t patch_cols, std::size_t k);
Mask patch_mask(const PatchMaskSpec& spec);

enum class LineFamily { periodic, random, poisson_gap, parametric };
std::string to_string(LineFamily f);
LineFamily line_family_from_string(const std::string& s);

struct KSpaceMaskSpec {
  std::size_t n_lines = 128;
  std::size_t acs = 12;
  double accel = 4.0;
  LineFamily family = LineFamily::random;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
};

// First ACS index and the budget outside the ACS.
std::size_t acs_start(const KSpaceMaskSpec& spec);
std::size_t line_budget(const KSpaceMaskSpec& spec);
// Phase-encoding line selection (true = sampled).
std::vector<bool> kspace_lines(const KSpaceMaskSpec& spec);
// Lines run along columns: kept(r, c) = lines[c] for every r.
Mask kspace_mask(const KSpaceMaskSpec& spec, std::size_t rows);

enum class AntennaAxis { tx, rx, both };
std::string to_string(AntennaAxis a);
AntennaAxis antenna_axis_from_string(const std::string& s);

struct AntennaMaskSpec {
  std::size_t n_rx = 16;
  std::size_t n_tx = 64;
  Geometry geometry = Geometry::periodic;
  std::size_t interval_d = 2;
  std::optional<std::size_t> off_budget;  // random only; default matches the periodic count
  AntennaAxis axis = AntennaAxis::tx;
  std::uint64_t seed = 0;
};

// ceil(n/d): indices 0, d, 2d, ... below n.
std::size_t periodic_off_count(std::size_t n, std::size_t d);
// Deactivated indices along one axis of length n.
std::vector<std::size_t> antenna_off_indices(const AntennaMaskSpec& spec, std::size_t n, Rng& rng);
Mask antenna_mask(const AntennaMaskSpec& spec);

Grid2C apply_mask(const Grid2C& field, const Mask& m);
Grid2R apply_mask(const Grid2R& field, const Mask& m);

}  // namespace phasegate
