// SPDX-License-Identifier: Apache-2.0
// Clustered geometric MIMO channels, AWGN, low-rank completion baseline, entropy audit of |H|.
#pragma once

#include <functional>
#include <vector>

#include "phasegate/masks.hpp"
#include "phasegate/numerics.hpp"
#include "phasegate/phase_space.hpp"

namespace phasegate::mimo {

struct ChannelConfig {
  std::size_t n_rx = 16;
  std::size_t n_tx = 64;
  std::size_t n_clusters = 3;
  std::size_t paths_per_cluster = 10;
  double angular_spread_deg = 7.5;  // standard deviation of the Laplacian offsets
  double cluster_decay = 1.0;       // cluster c has relative power exp(-decay*c)
  double snr_db = 15.0;
  std::uint64_t seed = 0;

  std::size_t paths() const { return n_clusters * paths_per_cluster; }
  void validate() const;
};

struct Path {
  cplx gain;
  double aoa = 0.0;  // radians
  double aod = 0.0;
};

struct Channel {
  Grid2C h;
  ChannelConfig config;
};

std::vector<cplx> steering_vector(std::size_t n, double angle_rad);
// H = sqrt(n_rx*n_tx/L) * sum_l g_l a_rx(aoa_l) a_tx(aod_l)^H
Grid2C channel_from_paths(std::size_t n_rx, std::size_t n_tx, const std::vector<Path>& paths);
// Path gains have unit mean power per path so that E||H||^2 = n_rx*n_tx.
std::vector<Path> draw_paths(const ChannelConfig& cfg, Rng& rng);
Channel gen_channel(const ChannelConfig& cfg);
Channel add_noise(const Channel& ch, double snr_db, Rng& rng);
double nmse(const Grid2C& h_true, const Grid2C& h_est);

using CompletionObserver = std::function<void(std::size_t iteration, const Grid2C& iterate)>;
Grid2C baseline_complete(const Grid2C& h_masked, const Mask& m, std::size_t rank_r, std::size_t iters,
                         const CompletionObserver& observer = {});
// Best rank-r approximation (truncated SVD).
Grid2C truncate_rank(const Grid2C& x, std::size_t rank_r);
std::vector<double> singular_values(const Grid2C& x);

// Audits |H| normalized to unit max against |H .* M| with the same factor.
DeltaSReport audit_channel(const Channel& ch, const Mask& m, const HusimiParams& p = HusimiParams::mimo(),
                           Weighting w = Weighting::energy);
DeltaSReport audit_channel(const Grid2C& h, const Mask& m, const HusimiParams& p = HusimiParams::mimo(),
                           Weighting w = Weighting::energy);

struct StudyConfig {
  ChannelConfig channel;
  std::size_t realizations = 200;
  std::vector<std::size_t> intervals{2, 3, 4, 6, 8};
  AntennaAxis axis = AntennaAxis::tx;
  HusimiParams husimi = HusimiParams::mimo();
  Weighting weighting = Weighting::energy;
  std::size_t rank_r = 4;
  std::size_t iters = 50;
  std::uint64_t seed = 0;
};

struct StudyRow {
  std::size_t realization = 0;
  std::uint64_t seed = 0;
  Geometry geometry = Geometry::periodic;
  std::size_t d = 0;
  std::size_t off_count = 0;
  double delta_s = 0.0;
  double nmse = 0.0;
};

// One row per (realization, geometry, d). The noisy channel is audited; NMSE is
// measured against the noiseless channel.
std::vector<StudyRow> run_study(const StudyConfig& cfg, std::vector<Channel>* channels_out = nullptr);

}  // namespace phasegate::mimo
