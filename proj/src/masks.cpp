// SPDX-License-Identifier: Apache-2.0
#include "phasegate/masks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

namespace phasegate {

Mask::Mask(Grid2<std::uint8_t> kept) : kept_(std::move(kept)) {
  for (auto& v : kept_.data()) v = v ? 1 : 0;
}

std::size_t Mask::keep_count() const {
  return static_cast<std::size_t>(std::count(kept_.data().begin(), kept_.data().end(), std::uint8_t{1}));
}

std::string to_string(Geometry g) { return g == Geometry::periodic ? "periodic" : "random"; }

Geometry geometry_from_string(const std::string& s) {
  if (s == "periodic") return Geometry::periodic;
  if (s == "random") return Geometry::random;
  throw ParameterError("unknown geometry '" + s + "'");
}

std::string to_string(LineFamily f) {
  switch (f) {
    case LineFamily::periodic: return "periodic";
    case LineFamily::random: return "random";
    case LineFamily::poisson_gap: return "poisson_gap";
    case LineFamily::parametric: return "parametric";
  }
  return "?";
}

LineFamily line_family_from_string(const std::string& s) {
  if (s == "periodic") return LineFamily::periodic;
  if (s == "random") return LineFamily::random;
  if (s == "poisson_gap" || s == "poisson") return LineFamily::poisson_gap;
  if (s == "parametric") return LineFamily::parametric;
  throw ParameterError("unknown mask family '" + s + "'");
}

std::string to_string(AntennaAxis a) {
  switch (a) {
    case AntennaAxis::tx: return "tx";
    case AntennaAxis::rx: return "rx";
    case AntennaAxis::both: return "both";
  }
  return "?";
}

AntennaAxis antenna_axis_from_string(const std::string& s) {
  if (s == "tx") return AntennaAxis::tx;
  if (s == "rx") return AntennaAxis::rx;
  if (s == "both") return AntennaAxis::both;
  throw ParameterError("unknown antenna axis '" + s + "'");
}

// --- patches ---------------------------------------------------------------

std::size_t periodic_patch_count(std::size_t patch_rows, std::size_t patch_cols, std::size_t k) {
  return ((patch_rows + k - 1) / k) * ((patch_cols + k - 1) / k);
}

Mask patch_mask(const PatchMaskSpec& spec) {
  if (spec.interval_k < 1) throw ParameterError("interval_k must be >= 1");
  if (spec.patch_rows < 1 || spec.patch_cols < 1 || spec.patch_px < 1)
    throw ParameterError("patch grid must be non-empty");
  const std::size_t n = spec.patch_rows * spec.patch_cols;
  std::vector<bool> keep(n, false);
  if (spec.geometry == Geometry::periodic) {
    for (std::size_t i = 0; i < spec.patch_rows; i += spec.interval_k)
      for (std::size_t j = 0; j < spec.patch_cols; j += spec.interval_k) keep[i * spec.patch_cols + j] = true;
  } else {
    const std::size_t k2 = spec.interval_k * spec.interval_k;
    const std::size_t budget = spec.budget.value_or((n + k2 - 1) / k2);
    if (budget > n) throw ParameterError("patch budget exceeds the patch count");
    Rng rng(spec.seed);
    for (auto i : rng.choose_k(n, budget)) keep[i] = true;
  }
  Mask m(spec.patch_rows * spec.patch_px, spec.patch_cols * spec.patch_px);
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (keep[(r / spec.patch_px) * spec.patch_cols + c / spec.patch_px]) m.set(r, c, true);
  return m;
}

// --- k-space lines ---------------------------------------------------------

namespace {

void check_spec(const KSpaceMaskSpec& s) {
  if (s.n_lines < 1) throw ParameterError("n_lines must be >= 1");
  if (s.acs > s.n_lines) throw ParameterError("acs exceeds n_lines");
  if (!(s.accel >= 1.0) || !std::isfinite(s.accel)) throw ParameterError("accel must be >= 1");
  if (!(s.alpha >= 0.0) || !(s.beta >= 0.0)) throw ParameterError("alpha and beta must be >= 0");
}

double gap_rate(double s, std::size_t k, std::size_t n) {
  const double c = static_cast<double>(n / 2);
  return s * std::abs(static_cast<double>(k) - c) / std::max(1.0, static_cast<double>(n) / 2.0);
}

double poisson_pmf(unsigned g, double lambda) {
  if (lambda == 0.0) return g == 0 ? 1.0 : 0.0;
  return std::exp(static_cast<double>(g) * std::log(lambda) - lambda - std::lgamma(g + 1.0));
}

// Expected number of lines visited by the outward walks on both sides.
double expected_poisson_count(double s, std::size_t n, std::size_t a0, std::size_t a1) {
  double total = 0.0;
  // Right side: cursor a1-1, positions a1..n-1. Left side mirrors with distances measured to the left.
  for (int side = 0; side < 2; ++side) {
    const std::size_t len = side == 0 ? n - a1 : a0;
    auto pos = [&](std::size_t j) -> std::size_t { return side == 0 ? a1 + j : a0 - 1 - j; };
    std::vector<double> v(len, 0.0);
    auto spread = [&](double mass, double lambda, std::size_t from_next) {
      for (std::size_t j = from_next; j < len; ++j) v[j] += mass * poisson_pmf(static_cast<unsigned>(j - from_next), lambda);
    };
    const std::size_t cursor = side == 0 ? a1 - 1 : a0;
    spread(1.0, gap_rate(s, cursor, n), 0);
    for (std::size_t j = 0; j < len; ++j) {
      total += v[j];
      if (v[j] > 0.0 && j + 1 < len) spread(v[j], gap_rate(s, pos(j), n), j + 1);
    }
  }
  return total;
}

double poisson_scale(std::size_t n, std::size_t a0, std::size_t a1, std::size_t budget) {
  thread_local std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, double> cache;
  const auto key = std::make_tuple(n, a0, a1, budget);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const auto target = static_cast<double>(budget);
  double lo = 0.0, hi = 1.0;
  while (expected_poisson_count(hi, n, a0, a1) > target && hi < 1e6) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (expected_poisson_count(mid, n, a0, a1) > target)
      lo = mid;
    else
      hi = mid;
  }
  const double s = 0.5 * (lo + hi);
  cache[key] = s;
  return s;
}

std::vector<std::size_t> poisson_walk(double s, std::size_t n, std::size_t a0, std::size_t a1, Rng& rng) {
  std::vector<std::size_t> out;
  // Right.
  std::size_t cur = a1 - 1;
  for (;;) {
    const std::size_t next = cur + 1 + rng.poisson(gap_rate(s, cur, n));
    if (next >= n) break;
    out.push_back(next);
    cur = next;
  }
  // Left.
  std::size_t lc = a0;
  for (;;) {
    const std::size_t step = 1 + rng.poisson(gap_rate(s, lc, n));
    if (step > lc) break;
    lc -= step;
    out.push_back(lc);
  }
  return out;
}

}  // namespace

std::size_t acs_start(const KSpaceMaskSpec& spec) {
  check_spec(spec);
  return spec.n_lines / 2 - spec.acs / 2;
}

std::size_t line_budget(const KSpaceMaskSpec& spec) {
  check_spec(spec);
  const auto total = static_cast<long long>(std::llround(static_cast<double>(spec.n_lines) / spec.accel));
  const long long b = total - static_cast<long long>(spec.acs);
  if (b < 0)
    throw InfeasibleSpecError("accel " + std::to_string(spec.accel) + " leaves fewer lines than the ACS block");
  return static_cast<std::size_t>(b);
}

std::vector<bool> kspace_lines(const KSpaceMaskSpec& spec) {
  const std::size_t n = spec.n_lines;
  const std::size_t a0 = acs_start(spec);
  const std::size_t a1 = a0 + spec.acs;
  const std::size_t budget = line_budget(spec);
  std::vector<bool> lines(n, false);
  for (std::size_t i = a0; i < a1; ++i) lines[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (i < a0 || i >= a1) out.push_back(i);
  if (budget >= out.size()) {
    for (auto i : out) lines[i] = true;
    return lines;
  }
  if (budget == 0) return lines;

  Rng rng(spec.seed);
  switch (spec.family) {
    case LineFamily::periodic: {
      const double stride = static_cast<double>(out.size()) / static_cast<double>(budget);
      for (std::size_t j = 0; j < budget; ++j)
        lines[out[static_cast<std::size_t>(std::floor((static_cast<double>(j) + 0.5) * stride))]] = true;
      break;
    }
    case LineFamily::random:
      for (auto i : rng.choose_k(out.size(), budget)) lines[out[i]] = true;
      break;
    case LineFamily::parametric: {
      const double c = static_cast<double>(n / 2);
      std::vector<double> w(out.size());
      for (std::size_t i = 0; i < out.size(); ++i)
        w[i] = std::pow(1.0 + spec.alpha * std::abs(static_cast<double>(out[i]) - c), -spec.beta);
      for (std::size_t draw = 0; draw < budget; ++draw) {
        double total = 0.0;
        for (double v : w) total += v;
        double u = rng.uniform() * total;
        std::size_t pick = out.size();
        for (std::size_t i = 0; i < w.size(); ++i) {
          if (w[i] <= 0.0) continue;
          pick = i;
          if (u < w[i]) break;
          u -= w[i];
        }
        lines[out[pick]] = true;
        w[pick] = 0.0;
      }
      break;
    }
    case LineFamily::poisson_gap: {
      // The walks need a cursor on each side; with no ACS both start at the centre.
      const double s = poisson_scale(n, a0, std::max<std::size_t>(a1, 1), budget);
      std::vector<std::size_t> pick;
      bool exact = false;
      for (int attempt = 0; attempt < 1000 && !exact; ++attempt) {
        pick = poisson_walk(s, n, a0, std::max<std::size_t>(a1, 1), rng);
        exact = pick.size() == budget;
      }
      if (!exact) {
        const double c = static_cast<double>(n / 2);
        auto dist = [c](std::size_t k) { return std::abs(static_cast<double>(k) - c); };
        std::stable_sort(pick.begin(), pick.end(), [&](auto x, auto y) { return dist(x) < dist(y); });
        if (pick.size() > budget) pick.resize(budget);
        std::vector<std::size_t> rest;
        for (auto i : out)
          if (std::find(pick.begin(), pick.end(), i) == pick.end()) rest.push_back(i);
        std::stable_sort(rest.begin(), rest.end(), [&](auto x, auto y) { return dist(x) < dist(y); });
        for (std::size_t i = 0; pick.size() < budget; ++i) pick.push_back(rest[i]);
      }
      for (auto i : pick) lines[i] = true;
      break;
    }
  }
  return lines;
}

Mask kspace_mask(const KSpaceMaskSpec& spec, std::size_t rows) {
  const auto lines = kspace_lines(spec);
  Mask m(rows, spec.n_lines);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < spec.n_lines; ++c) m.set(r, c, lines[c]);
  return m;
}

// --- antennas --------------------------------------------------------------

std::size_t periodic_off_count(std::size_t n, std::size_t d) { return (n + d - 1) / d; }

std::vector<std::size_t> antenna_off_indices(const AntennaMaskSpec& spec, std::size_t n, Rng& rng) {
  if (spec.interval_d < 1) throw ParameterError("interval_d must be >= 1");
  std::vector<std::size_t> off;
  if (spec.geometry == Geometry::periodic) {
    for (std::size_t i = 0; i < n; i += spec.interval_d) off.push_back(i);
    return off;
  }
  const std::size_t count = spec.off_budget.value_or(periodic_off_count(n, spec.interval_d));
  if (count > n) throw ParameterError("off_budget exceeds the axis length");
  off = rng.choose_k(n, count);
  std::sort(off.begin(), off.end());
  return off;
}

Mask antenna_mask(const AntennaMaskSpec& spec) {
  if (spec.n_rx < 1 || spec.n_tx < 1) throw ParameterError("antenna counts must be >= 1");
  Rng rng(spec.seed);
  std::vector<bool> rx_on(spec.n_rx, true), tx_on(spec.n_tx, true);
  if (spec.axis != AntennaAxis::tx)
    for (auto i : antenna_off_indices(spec, spec.n_rx, rng)) rx_on[i] = false;
  if (spec.axis != AntennaAxis::rx)
    for (auto i : antenna_off_indices(spec, spec.n_tx, rng)) tx_on[i] = false;
  Mask m(spec.n_rx, spec.n_tx);
  for (std::size_t r = 0; r < spec.n_rx; ++r)
    for (std::size_t c = 0; c < spec.n_tx; ++c) m.set(r, c, rx_on[r] && tx_on[c]);
  return m;
}

Grid2C apply_mask(const Grid2C& field, const Mask& m) {
  if (!field.same_shape(m.grid())) throw ParameterError("mask shape does not match the field");
  Grid2C out = field;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!m.grid()[i]) out[i] = 0.0;
  return out;
}

Grid2R apply_mask(const Grid2R& field, const Mask& m) {
  if (!field.same_shape(m.grid())) throw ParameterError("mask shape does not match the field");
  Grid2R out = field;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!m.grid()[i]) out[i] = 0.0;
  return out;
}

}  // namespace phasegate
