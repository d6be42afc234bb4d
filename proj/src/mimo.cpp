// SPDX-License-Identifier: Apache-2.0
#include "phasegate/mimo.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

namespace phasegate::mimo {

namespace {

Eigen::MatrixXcd to_eigen(const Grid2C& g) {
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(g.rows()), static_cast<Eigen::Index>(g.cols()));
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = g(r, c);
  return m;
}

Grid2C from_eigen(const Eigen::MatrixXcd& m) {
  Grid2C g(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (std::size_t r = 0; r < g.rows(); ++r)
    for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) = m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return g;
}

}  // namespace

void ChannelConfig::validate() const {
  if (n_rx < 2 || n_tx < 2) throw ParameterError("n_rx and n_tx must be >= 2");
  if (paths() < 1) throw ParameterError("channel needs at least one path");
  if (!(angular_spread_deg > 0.0)) throw ParameterError("angular spread must be positive");
  if (!(cluster_decay >= 0.0)) throw ParameterError("cluster decay must be >= 0");
}

std::vector<cplx> steering_vector(std::size_t n, double angle_rad) {
  if (n < 1) throw ParameterError("steering vector needs n >= 1");
  std::vector<cplx> a(n);
  const double s = std::sin(angle_rad);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) a[i] = std::polar(norm, std::numbers::pi * static_cast<double>(i) * s);
  return a;
}

Grid2C channel_from_paths(std::size_t n_rx, std::size_t n_tx, const std::vector<Path>& paths) {
  if (paths.empty()) throw ParameterError("channel needs at least one path");
  Grid2C h(n_rx, n_tx);
  for (const auto& p : paths) {
    const auto ar = steering_vector(n_rx, p.aoa);
    const auto at = steering_vector(n_tx, p.aod);
    for (std::size_t r = 0; r < n_rx; ++r) {
      const cplx gr = p.gain * ar[r];
      for (std::size_t c = 0; c < n_tx; ++c) h(r, c) += gr * std::conj(at[c]);
    }
  }
  const double scale = std::sqrt(static_cast<double>(n_rx * n_tx) / static_cast<double>(paths.size()));
  for (auto& v : h.data()) v *= scale;
  return h;
}

std::vector<Path> draw_paths(const ChannelConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<double> power(cfg.n_clusters);
  double total = 0.0;
  for (std::size_t c = 0; c < cfg.n_clusters; ++c) total += power[c] = std::exp(-cfg.cluster_decay * static_cast<double>(c));
  const double L = static_cast<double>(cfg.paths());
  const double b = cfg.angular_spread_deg * std::numbers::pi / 180.0 / std::numbers::sqrt2;
  std::vector<Path> paths;
  paths.reserve(cfg.paths());
  for (std::size_t c = 0; c < cfg.n_clusters; ++c) {
    const double center_aoa = (rng.uniform() - 0.5) * std::numbers::pi;
    const double center_aod = (rng.uniform() - 0.5) * std::numbers::pi;
    // Per-path power so that the L paths average to 1.
    const double var = L * power[c] / total / static_cast<double>(cfg.paths_per_cluster);
    for (std::size_t p = 0; p < cfg.paths_per_cluster; ++p) {
      Path path;
      path.gain = std::sqrt(var) * rng.complex_gauss();
      path.aoa = center_aoa + rng.laplace(b);
      path.aod = center_aod + rng.laplace(b);
      paths.push_back(path);
    }
  }
  return paths;
}

Channel gen_channel(const ChannelConfig& cfg) {
  Rng rng(cfg.seed);
  const auto paths = draw_paths(cfg, rng);
  return {channel_from_paths(cfg.n_rx, cfg.n_tx, paths), cfg};
}

Channel add_noise(const Channel& ch, double snr_db, Rng& rng) {
  Channel out = ch;
  const double per_entry = energy(ch.h) / static_cast<double>(ch.h.size()) * std::pow(10.0, -snr_db / 10.0);
  if (!std::isfinite(per_entry)) throw ParameterError("noise power is not finite");
  const double sd = std::sqrt(per_entry);
  for (auto& v : out.h.data()) v += sd * rng.complex_gauss();
  out.config.snr_db = snr_db;
  return out;
}

double nmse(const Grid2C& h_true, const Grid2C& h_est) {
  if (!h_true.same_shape(h_est)) throw ParameterError("nmse: shape mismatch");
  const double ref = energy(h_true);
  if (!(ref > 0.0)) throw DegenerateError("nmse: reference has zero energy");
  KahanSum s;
  for (std::size_t i = 0; i < h_true.size(); ++i) s.add(std::norm(h_true[i] - h_est[i]));
  return s.value() / ref;
}

Grid2C truncate_rank(const Grid2C& x, std::size_t rank_r) {
  const Eigen::MatrixXcd m = to_eigen(x);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto r = static_cast<Eigen::Index>(std::min<std::size_t>(rank_r, static_cast<std::size_t>(svd.singularValues().size())));
  const Eigen::MatrixXcd low = svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() *
                               svd.matrixV().leftCols(r).adjoint();
  return from_eigen(low);
}

std::vector<double> singular_values(const Grid2C& x) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(x));
  const auto& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

Grid2C baseline_complete(const Grid2C& h_masked, const Mask& m, std::size_t rank_r, std::size_t iters,
                         const CompletionObserver& observer) {
  if (!h_masked.same_shape(m.grid())) throw ParameterError("completion: mask shape mismatch");
  if (iters < 1) throw ParameterError("completion needs at least one iteration");
  if (rank_r < 1 || rank_r > std::min(h_masked.rows(), h_masked.cols()))
    throw ParameterError("completion rank must lie in [1, min(rows, cols)]");
  if (m.keep_count() == 0) throw DegenerateError("completion: every entry is masked");
  Grid2C x = apply_mask(h_masked, m);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (m.grid()[i]) x[i] = h_masked[i];
    x = truncate_rank(x, rank_r);
    if (observer) observer(it, x);
  }
  return x;
}

DeltaSReport audit_channel(const Grid2C& h, const Mask& m, const HusimiParams& p, Weighting w) {
  if (p.win > h.rows() || p.win > h.cols()) throw ParameterError("channel matrix smaller than the window");
  const double peak = max_abs(h);
  if (!(peak > 0.0)) throw DegenerateError("audit of an all-zero channel");
  Grid2R ref = magnitude(h);
  for (auto& v : ref.data()) v /= peak;
  const Grid2R acq = apply_mask(ref, m);
  return delta_s(ref, acq, p, w);
}

DeltaSReport audit_channel(const Channel& ch, const Mask& m, const HusimiParams& p, Weighting w) {
  return audit_channel(ch.h, m, p, w);
}

std::vector<StudyRow> run_study(const StudyConfig& cfg, std::vector<Channel>* channels_out) {
  cfg.channel.validate();
  if (cfg.intervals.empty()) throw ParameterError("study needs at least one interval d");
  std::vector<StudyRow> rows;
  for (std::size_t i = 0; i < cfg.realizations; ++i) {
    const std::uint64_t seed = derive_seed(cfg.seed, i);
    ChannelConfig cc = cfg.channel;
    cc.seed = seed;
    const Channel clean = gen_channel(cc);
    Rng noise_rng(derive_seed(seed, 1));
    const Channel noisy = add_noise(clean, cc.snr_db, noise_rng);
    if (channels_out) channels_out->push_back(noisy);
    for (std::size_t d : cfg.intervals) {
      for (Geometry g : {Geometry::periodic, Geometry::random}) {
        AntennaMaskSpec spec;
        spec.n_rx = cc.n_rx;
        spec.n_tx = cc.n_tx;
        spec.geometry = g;
        spec.interval_d = d;
        spec.axis = cfg.axis;
        spec.seed = derive_seed(seed, 100 + d);
        const Mask m = antenna_mask(spec);
        StudyRow row;
        row.realization = i;
        row.seed = seed;
        row.geometry = g;
        row.d = d;
        if (cfg.axis != AntennaAxis::tx) row.off_count += periodic_off_count(cc.n_rx, d);
        if (cfg.axis != AntennaAxis::rx) row.off_count += periodic_off_count(cc.n_tx, d);
        row.delta_s = audit_channel(noisy.h, m, cfg.husimi, cfg.weighting).delta;
        const Grid2C est = baseline_complete(apply_mask(noisy.h, m), m, cfg.rank_r, cfg.iters);
        row.nmse = nmse(clean.h, est);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace phasegate::mimo
