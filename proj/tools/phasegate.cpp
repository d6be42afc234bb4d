// SPDX-License-Identifier: Apache-2.0
// phasegate command-line tool: audit, maskgen, select, mimo, validate, correlate, ablate.
//
// Every command writes its outputs plus manifest.json into --out. Exit codes:
// 0 ok, 2 I/O, 3 bad parameters, 4 a validation check failed.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>

#include "phasegate/io.hpp"
#include "phasegate/mimo.hpp"
#include "phasegate/mri.hpp"
#include "phasegate/oracle.hpp"
#include "phasegate/selector.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace phasegate;

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr int kExitIo = 2;
constexpr int kExitParam = 3;
constexpr int kExitValidation = 4;

// Nested objects select subcommands: {"audit": {"win": 8}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    walk(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }
  static void walk(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    if (!j.is_object()) throw CLI::ConversionError("config root must be a JSON object");
    for (const auto& [key, v] : j.items()) {
      if (v.is_object()) {
        auto p = parents;
        p.push_back(key);
        walk(v, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (v.is_array())
        for (const auto& e : v) item.inputs.push_back(scalar(e));
      else
        item.inputs.push_back(scalar(v));
      out.push_back(std::move(item));
    }
  }
};

// Options shared by every subcommand.
struct Common {
  std::string out = ".";
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--out,-o", c.out, "output directory");
  sub->add_option("--seed", c.seed, "base seed")->envname("PHASEGATE_SEED");
}

struct HusimiFlags {
  std::string preset;
  std::optional<std::size_t> win;
  std::optional<double> sigma;
  std::optional<std::size_t> hop;
  std::string weighting;
  bool multiscale = false;
  double hop_ratio = 1.0;
  double energy_floor = kDefaultEnergyFloor;
};

void add_husimi(CLI::App* sub, HusimiFlags& h) {
  sub->add_option("--preset", h.preset, "vision | mri | mimo")->check(CLI::IsMember({"vision", "mri", "mimo"}));
  sub->add_option("--win", h.win, "window size");
  sub->add_option("--sigma", h.sigma, "Gaussian window width");
  sub->add_option("--hop", h.hop, "window stride");
  sub->add_option("--weighting", h.weighting, "uniform | energy")->check(CLI::IsMember({"uniform", "energy"}));
  sub->add_flag("--multiscale", h.multiscale, "energy-weighted scale ladder 32..256");
  sub->add_option("--hop-ratio", h.hop_ratio, "hop as a fraction of the window (multiscale)");
  sub->add_option("--energy-floor", h.energy_floor, "windows at or below this energy are excluded");
}

struct ResolvedHusimi {
  HusimiParams params;
  Weighting weighting = Weighting::uniform;
  bool multiscale = false;
  double hop_ratio = 1.0;
  double energy_floor = kDefaultEnergyFloor;

  std::string describe() const {
    std::string s;
    if (multiscale) {
      s = "multiscale hop_ratio=" + io::format_double(hop_ratio);
    } else {
      s = "win=" + std::to_string(params.win) + " sigma=" + io::format_double(params.sigma) +
          " hop=" + std::to_string(params.hop);
    }
    return s + " weighting=" + to_string(weighting);
  }
};

ResolvedHusimi resolve(const HusimiFlags& h, const std::string& fallback_preset) {
  ResolvedHusimi r;
  const std::string preset = h.preset.empty() ? fallback_preset : h.preset;
  if (preset == "mri") {
    r.params = HusimiParams::mri();
  } else if (preset == "mimo") {
    r.params = HusimiParams::mimo();
    r.weighting = Weighting::energy;
  } else if (preset == "vision") {
    r.multiscale = true;
    r.weighting = Weighting::energy;
  }
  if (h.win) r.params.win = *h.win;
  if (h.sigma) r.params.sigma = *h.sigma;
  if (h.hop) r.params.hop = *h.hop;
  if (!h.weighting.empty()) r.weighting = weighting_from_string(h.weighting);
  if (h.multiscale) r.multiscale = true;
  if (r.multiscale && (h.win || h.sigma || h.hop))
    throw ParameterError("--multiscale picks its own windows; drop --win/--sigma/--hop");
  if (r.multiscale && r.weighting != Weighting::energy)
    throw ParameterError("the multiscale ladder is energy weighted");
  r.hop_ratio = h.hop_ratio;
  r.energy_floor = h.energy_floor;
  if (!r.multiscale) r.params.validate();
  return r;
}

template <class G>
DeltaSReport run_delta(const G& ref, const G& acq, const ResolvedHusimi& h) {
  if (h.multiscale)
    return multiscale_delta_s(ref, acq, default_scale_ladder(ref.rows(), ref.cols()), h.hop_ratio, h.energy_floor);
  return delta_s(ref, acq, h.params, h.weighting, h.energy_floor);
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& tok : CLI::detail::split(s, ',')) {
    std::size_t v = 0;
    const auto t = CLI::detail::trim_copy(tok);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw ParameterError("not an integer list: " + s);
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : CLI::detail::split(s, ',')) {
    double v = 0.0;
    const auto t = CLI::detail::trim_copy(tok);
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw ParameterError("not a number list: " + s);
    out.push_back(v);
  }
  return out;
}

json typed_value(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  std::int64_t i = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), i);
  if (r.ec == std::errc() && r.ptr == s.data() + s.size() && !s.empty()) return i;
  double d = 0.0;
  r = std::from_chars(s.data(), s.data() + s.size(), d);
  if (r.ec == std::errc() && r.ptr == s.data() + s.size() && !s.empty() && std::isfinite(d)) return d;
  return s;
}

// Every option of the subcommand with the value it ended up with; --out is left out so that
// two output directories can share a manifest.
json resolved_config(const CLI::App* sub) {
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "out" || name == "seed") continue;
    std::vector<std::string> vals;
    if (opt->count() > 0) {
      vals = opt->results();
      if (opt->get_type_size() == 0) vals = {"true"};
    } else {
      const std::string d = opt->get_default_str();
      if (!d.empty()) vals = {d};
    }
    if (vals.empty()) {
      cfg[name] = nullptr;
    } else if (vals.size() == 1 && opt->get_expected_max() <= 1) {
      cfg[name] = typed_value(vals.front());
    } else {
      json arr = json::array();
      for (const auto& v : vals) arr.push_back(typed_value(v));
      cfg[name] = arr;
    }
  }
  return cfg;
}

class Run {
 public:
  Run(const CLI::App* sub, const Common& c) : dir_(c.out) {
    manifest_["command"] = sub->get_name();
    manifest_["config"] = resolved_config(sub);
    manifest_["seed"] = c.seed;
    manifest_["tool_version"] = kToolVersion;
    manifest_["input_digests"] = json::object();
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  std::string read_input(const fs::path& p) {
    std::string bytes = io::read_file(p);
    manifest_["input_digests"][p.generic_string()] = io::sha256_hex(bytes);
    return bytes;
  }
  io::Array read_arr1(const fs::path& p) { return io::decode_arr1(read_input(p)); }

  void write(const std::string& name, const std::string& contents) {
    io::write_atomic(dir_ / name, contents);
    manifest_["outputs"].push_back(name);
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
  void finish() { io::write_atomic(dir_ / "manifest.json", manifest_.dump(2) + "\n"); }

 private:
  fs::path dir_;
  json manifest_;
};

std::string stem_of(const fs::path& p) { return p.stem().string(); }

// Calibration slices: every *.arr1 in a directory (sorted), each a coil stack, or synthetic phantoms.
struct SliceSource {
  std::string dir;
  std::size_t phantoms = 0;
  std::size_t size = 128;
  std::size_t coils = 4;
};

void add_slices(CLI::App* sub, SliceSource& s) {
  sub->add_option("--calibration", s.dir, "directory of k-space ARR1 files (coils x rows x cols)");
  sub->add_option("--phantoms", s.phantoms, "synthesize this many phantom slices instead");
  sub->add_option("--size", s.size, "phantom side length");
  sub->add_option("--coils", s.coils, "phantom coil count");
}

std::pair<std::vector<mri::MultiCoilKSpace>, std::vector<std::string>> load_slices(const SliceSource& s,
                                                                                     std::uint64_t seed, Run& run) {
  std::vector<mri::MultiCoilKSpace> data;
  std::vector<std::string> ids;
  if (!s.dir.empty() && s.phantoms > 0) throw ParameterError("give either --calibration or --phantoms");
  if (!s.dir.empty()) {
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(s.dir, ec))
      if (e.is_regular_file() && e.path().extension() == ".arr1") files.push_back(e.path());
    if (ec) throw IoError("cannot list " + s.dir + ": " + ec.message());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      data.push_back({io::to_grids(run.read_arr1(f))});
      ids.push_back(stem_of(f));
    }
  } else {
    for (std::size_t i = 0; i < s.phantoms; ++i) {
      data.push_back(mri::phantom(s.size, s.size, s.coils, derive_seed(seed, i)));
      ids.push_back("phantom" + std::to_string(i));
    }
  }
  if (data.empty()) throw ParameterError("no calibration slices");
  return {std::move(data), std::move(ids)};
}

// ---- audit -------------------------------------------------------------------------------

struct MaskFlags {
  std::string family = "periodic";
  std::size_t k = 2;
  std::size_t patch_px = 16;
  std::optional<std::size_t> budget;
  double accel = 4.0;
  std::size_t acs = 12;
  double alpha = 0.0;
  double beta = 0.0;
};

void add_patch_flags(CLI::App* sub, MaskFlags& m) {
  sub->add_option("--k", m.k, "patch lattice interval");
  sub->add_option("--patch-px", m.patch_px, "patch side in pixels");
  sub->add_option("--budget", m.budget, "kept patches for random masks");
}

void add_line_flags(CLI::App* sub, MaskFlags& m) {
  sub->add_option("--accel", m.accel, "acceleration factor");
  sub->add_option("--acs", m.acs, "fully sampled centre lines");
  sub->add_option("--alpha", m.alpha, "parametric density weight");
  sub->add_option("--beta", m.beta, "parametric density decay");
}

Mask patch_mask_for(const MaskFlags& f, std::size_t rows, std::size_t cols, std::uint64_t seed) {
  if (f.patch_px == 0 || rows % f.patch_px != 0 || cols % f.patch_px != 0)
    throw ParameterError("--patch-px must divide the field size");
  return patch_mask({rows / f.patch_px, cols / f.patch_px, f.patch_px, geometry_from_string(f.family), f.k, f.budget,
                     seed});
}

Mask line_mask_for(const MaskFlags& f, std::size_t rows, std::size_t cols, std::uint64_t seed) {
  return kspace_mask({cols, f.acs, f.accel, line_family_from_string(f.family), f.alpha, f.beta, seed}, rows);
}

int cmd_audit(const CLI::App* sub, const Common& c, const std::vector<std::string>& inputs, const std::string& domain,
              const std::string& mask_file, const MaskFlags& mf, const HusimiFlags& hf) {
  Run run(sub, c);
  const bool kspace = domain == "kspace";
  const ResolvedHusimi h = resolve(hf, kspace ? "mri" : "");
  std::optional<Mask> file_mask;
  if (!mask_file.empty()) file_mask = io::to_mask(run.read_arr1(mask_file));
  auto mask_for = [&](std::size_t rows, std::size_t cols) {
    if (file_mask) {
      if (file_mask->rows() != rows || file_mask->cols() != cols) throw ParameterError("mask shape does not match input");
      return *file_mask;
    }
    return kspace ? line_mask_for(mf, rows, cols, c.seed) : patch_mask_for(mf, rows, cols, c.seed);
  };

  io::CsvWriter csv({"id", "s_ref", "s_acq", "delta_s", "abs_delta_s", "params", "seed"});
  auto row = [&](const std::string& id, const DeltaSReport& r) {
    csv.add(id).add(r.s_ref).add(r.s_acq).add(r.delta).add(r.abs_delta).add(h.describe()).add(c.seed);
    csv.end_row();
  };
  for (const auto& in : inputs) {
    const auto grids = io::to_grids(run.read_arr1(in));
    const std::string id = stem_of(in);
    if (kspace) {
      const mri::MultiCoilKSpace k{grids};
      k.validate();
      const auto ref = mri::rss_reconstruct(k);
      const auto zf = mri::zero_fill(k, mask_for(k.rows(), k.cols()), ref.norm_factor);
      row(id, run_delta(ref.grid, zf.grid, h));
      continue;
    }
    for (std::size_t i = 0; i < grids.size(); ++i) {
      const auto& g = grids[i];
      const auto r = run_delta(g, apply_mask(g, mask_for(g.rows(), g.cols())), h);
      row(grids.size() == 1 ? id : id + ":" + std::to_string(i), r);
    }
  }
  run.write("audit.csv", csv.str());
  run.finish();
  return 0;
}

// ---- maskgen -----------------------------------------------------------------------------

struct MaskgenFlags {
  std::string kind = "kspace";
  std::size_t patches = 16;
  std::optional<std::size_t> patch_cols;
  std::size_t lines = 128;
  std::optional<std::size_t> rows;
  std::size_t n_rx = 16;
  std::size_t n_tx = 64;
  std::size_t d = 2;
  std::string axis = "tx";
};

int cmd_maskgen(const CLI::App* sub, const Common& c, const MaskgenFlags& g, const MaskFlags& mf) {
  Run run(sub, c);
  Mask m;
  json side;
  side["kind"] = g.kind;
  side["family"] = mf.family;
  side["seed"] = c.seed;
  if (g.kind == "patch") {
    const PatchMaskSpec spec{g.patches, g.patch_cols.value_or(g.patches), mf.patch_px, geometry_from_string(mf.family), mf.k, mf.budget,
                             c.seed};
    m = patch_mask(spec);
    side["patch_rows"] = spec.patch_rows;
    side["patch_cols"] = spec.patch_cols;
    side["patch_px"] = mf.patch_px;
    side["k"] = mf.k;
    side["budget"] = mf.budget ? json(*mf.budget) : json(nullptr);
  } else if (g.kind == "kspace") {
    const KSpaceMaskSpec spec{g.lines, mf.acs, mf.accel, line_family_from_string(mf.family), mf.alpha, mf.beta, c.seed};
    m = kspace_mask(spec, g.rows.value_or(g.lines));
    std::vector<int> lines;
    for (bool b : kspace_lines(spec)) lines.push_back(b ? 1 : 0);
    side["lines"] = g.lines;
    side["acs"] = mf.acs;
    side["acs_start"] = acs_start(spec);
    side["accel"] = mf.accel;
    side["alpha"] = mf.alpha;
    side["beta"] = mf.beta;
    side["line_budget"] = line_budget(spec);
    side["sampled_lines"] = lines;
  } else if (g.kind == "antenna") {
    const AntennaMaskSpec spec{g.n_rx, g.n_tx, geometry_from_string(mf.family), g.d, mf.budget,
                               antenna_axis_from_string(g.axis), c.seed};
    m = antenna_mask(spec);
    side["n_rx"] = g.n_rx;
    side["n_tx"] = g.n_tx;
    side["d"] = g.d;
    side["axis"] = g.axis;
    side["off_budget"] = mf.budget ? json(*mf.budget) : json(nullptr);
  } else {
    throw ParameterError("unknown mask kind '" + g.kind + "'");
  }
  side["shape"] = {m.rows(), m.cols()};
  side["kept"] = m.keep_count();
  run.write("mask.arr1", io::encode_arr1(io::from_mask(m)));
  run.write_json("mask.json", side);
  run.finish();
  return 0;
}

// ---- select ------------------------------------------------------------------------------

int cmd_select(const CLI::App* sub, const Common& c, const SliceSource& src, const MaskFlags& mf,
               const std::string& alphas, const std::string& betas, const std::string& criterion,
               const HusimiFlags& hf) {
  Run run(sub, c);
  const ResolvedHusimi h = resolve(hf, "mri");
  if (h.multiscale || h.weighting != Weighting::uniform)
    throw ParameterError("selection audits use single-scale uniform weighting");
  auto [data, ids] = load_slices(src, c.seed, run);
  selector::SelectionInput in;
  in.calibration = std::move(data);
  in.ids = ids;
  in.accel = mf.accel;
  in.acs = mf.acs;
  if (!alphas.empty()) in.alphas = parse_double_list(alphas);
  if (!betas.empty()) in.betas = parse_double_list(betas);
  in.husimi = h.params;
  in.seed = c.seed;

  std::vector<selector::Criterion> crits;
  if (criterion == "all")
    crits = {selector::Criterion::min_abs_delta_s, selector::Criterion::min_kspace_l2,
             selector::Criterion::max_zero_filled_psnr};
  else
    crits = {selector::criterion_from_string(criterion)};

  const auto ev = selector::evaluate_grid(in);
  io::CsvWriter csv({"criterion", "alpha", "beta", "mean", "stddev", "n"});
  json out;
  out["tie_break"] = "scores rounded to 1e-9; ties go to the smallest (alpha, beta)";
  out["psnr_cap_db"] = mri::kPsnrCap;
  out["calibration_ids"] = ids;
  out["accel"] = in.accel;
  out["acs"] = in.acs;
  out["husimi"] = {{"win", h.params.win}, {"sigma", h.params.sigma}, {"hop", h.params.hop}};
  out["results"] = json::array();
  for (auto crit : crits) {
    const auto res = selector::select_from(ev, crit, ids);
    const bool is_psnr = crit == selector::Criterion::max_zero_filled_psnr;
    for (const auto& r : res.score_table) {
      const double m = is_psnr ? mri::serialized_psnr(r.mean) : r.mean;
      csv.add(selector::to_string(crit)).add(r.alpha).add(r.beta).add(m).add(r.stddev).add(r.samples.size());
      csv.end_row();
    }
    out["results"].push_back({{"criterion", selector::to_string(crit)},
                              {"orientation", orientation(crit) == Orientation::lower_better ? "lower" : "higher"},
                              {"best_alpha", res.best_alpha},
                              {"best_beta", res.best_beta}});
  }
  run.write("scores.csv", csv.str());
  run.write_json("selection.json", out);
  run.finish();
  return 0;
}

// ---- mimo --------------------------------------------------------------------------------

int cmd_mimo(const CLI::App* sub, const Common& c, mimo::StudyConfig cfg, const std::string& intervals,
             const std::string& axis, bool save_channels, const HusimiFlags& hf) {
  Run run(sub, c);
  const ResolvedHusimi h = resolve(hf, "mimo");
  if (h.multiscale) throw ParameterError("channels are audited at a single scale");
  cfg.husimi = h.params;
  cfg.weighting = h.weighting;
  cfg.intervals = parse_size_list(intervals);
  cfg.axis = antenna_axis_from_string(axis);
  cfg.seed = c.seed;
  std::vector<mimo::Channel> channels;
  const auto rows = mimo::run_study(cfg, save_channels ? &channels : nullptr);

  io::CsvWriter csv({"realization", "seed", "geometry", "d", "off_count", "delta_s", "abs_delta_s", "nmse"});
  std::map<std::pair<int, std::size_t>, std::pair<std::vector<double>, std::vector<double>>> by;
  for (const auto& r : rows) {
    csv.add(r.realization).add(r.seed).add(to_string(r.geometry)).add(r.d).add(r.off_count).add(r.delta_s);
    csv.add(std::abs(r.delta_s)).add(r.nmse);
    csv.end_row();
    auto& cell = by[{static_cast<int>(r.geometry), r.d}];
    cell.first.push_back(r.delta_s);
    cell.second.push_back(r.nmse);
  }
  json summary;
  std::vector<double> cfg_ds, cfg_nmse;
  io::CsvWriter sc({"geometry", "d", "mean_delta_s", "mean_nmse", "n"});
  for (const auto& [key, v] : by) {
    const double md = mean(v.first), mn = mean(v.second);
    cfg_ds.push_back(md);
    cfg_nmse.push_back(mn);
    const auto geo = to_string(static_cast<Geometry>(key.first));
    sc.add(geo).add(key.second).add(md).add(mn).add(v.first.size());
    sc.end_row();
  }
  if (cfg_ds.size() >= 2) {
    try {
      const auto fit = ols_pearson(cfg_nmse, cfg_ds);
      summary["nmse_vs_delta_s"] = {{"pearson_r", fit.pearson_r}, {"r_ci_low", fit.r_ci_low},
                                    {"r_ci_high", fit.r_ci_high}, {"slope", fit.slope}, {"n", fit.n}};
    } catch (const DegenerateError&) {
      summary["nmse_vs_delta_s"] = nullptr;
    }
  }
  summary["configurations"] = by.size();
  summary["realizations"] = cfg.realizations;
  summary["snr_db"] = cfg.channel.snr_db;
  run.write("mimo.csv", csv.str());
  run.write("mimo_summary.csv", sc.str());
  run.write_json("mimo_summary.json", summary);
  if (save_channels) {
    std::vector<Grid2C> hs;
    for (const auto& ch : channels) hs.push_back(ch.h);
    run.write("channels.arr1", io::encode_arr1(io::from_stack(hs)));
  }
  run.finish();
  return 0;
}

// ---- validate ----------------------------------------------------------------------------

struct ValidateFlags {
  std::string suite = "all";
  std::string ns = "64,256,1024,4096";
  std::size_t trials = 64;
  double rho = 0.5;
  double f0 = 0.1;
  std::size_t win = 8;
  double sigma = 8.0 / 6.0;
  std::size_t hop = 8;
};

struct Check {
  std::string suite, name;
  double value = 0.0;
  double lo = 0.0, hi = 0.0;
  bool pass() const { return value >= lo && value <= hi; }
};

std::vector<cplx> random_signal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<cplx> v(n);
  for (auto& x : v) x = rng.complex_gauss();
  return v;
}

int cmd_validate(const CLI::App* sub, const Common& c, const ValidateFlags& v) {
  const std::vector<std::string> known{"wigner", "folding", "jensen", "concentration", "all"};
  if (std::find(known.begin(), known.end(), v.suite) == known.end())
    throw ParameterError("unknown suite '" + v.suite + "'");
  Run run(sub, c);
  auto want = [&](const std::string& s) { return v.suite == "all" || v.suite == s; };
  std::vector<Check> checks;

  if (want("wigner")) {
    double marg = 0.0, imag = 0.0, pc = 0.0;
    for (std::uint64_t t = 0; t < 100; ++t) {
      const std::size_t n = 3 + 2 * (t % 15);
      const auto s = random_signal(n, derive_seed(c.seed, t));
      const auto w = oracle::wigner1d(s);
      imag = std::max(imag, w.max_imag);
      const auto spec = dft(s);
      for (std::size_t x = 0; x < n; ++x) {
        double acc = 0.0, acc2 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          acc += w(x, k);
          acc2 += w(k, x);
        }
        marg = std::max(marg, std::abs(acc / n - std::norm(s[x])));
        marg = std::max(marg, std::abs(acc2 / n - std::norm(spec[x])));
      }
      pc = std::max(pc, oracle::check_product_convolution(random_signal(n, derive_seed(c.seed, 1000 + t)), s));
    }
    checks.push_back({"wigner", "marginals_max_error", marg, 0.0, 1e-8});
    checks.push_back({"wigner", "max_imag", imag, 0.0, 1e-10});
    checks.push_back({"wigner", "product_convolution_max_error", pc, 0.0, 1e-8});
  }
  if (want("folding")) {
    const auto s = random_signal(64, derive_seed(c.seed, 2000));
    for (std::size_t q : {2u, 4u, 8u})
      checks.push_back({"folding", "q" + std::to_string(q) + "_max_error", oracle::check_folding_identity(s, q), 0.0,
                        1e-10});
  }
  if (want("jensen")) {
    Rng rng(derive_seed(c.seed, 3000));
    double worst = INFINITY;
    for (int t = 0; t < 100; ++t) {
      const std::size_t m = 2 + rng.below(6), len = 2 + rng.below(63);
      std::vector<std::vector<double>> sp(m, std::vector<double>(len));
      std::vector<double> w(m);
      double ws = 0.0;
      for (auto& x : w) ws += (x = rng.uniform());
      for (auto& x : w) x /= ws;
      for (auto& s : sp) {
        double tot = 0.0;
        for (auto& x : s) tot += (x = rng.uniform());
        for (auto& x : s) x /= tot;
      }
      const auto r = oracle::check_jensen_mixture(sp, w);
      worst = std::min(worst, r.lhs - r.rhs);
    }
    checks.push_back({"jensen", "min_lhs_minus_rhs", worst, -1e-12, INFINITY});
  }
  if (want("concentration")) {
    const double f0 = v.f0;
    const oracle::FieldGenerator gen = [f0](std::size_t r, std::size_t cc, Rng& rng) {
      return lorentzian_noise(r, cc, f0, rng);
    };
    const auto curve = oracle::concentration_experiment(gen, v.rho, HusimiParams{v.win, v.sigma, v.hop, {}},
                                                        parse_size_list(v.ns), v.trials, c.seed);
    io::CsvWriter csv({"n", "l1_mean", "fluct_mean", "trials"});
    for (std::size_t i = 0; i < curve.ns.size(); ++i) {
      csv.add(curve.ns[i]).add(curve.l1_means[i]).add(curve.fluct_means[i]).add(v.trials);
      csv.end_row();
    }
    run.write("concentration.csv", csv.str());
    checks.push_back({"concentration", "l1_loglog_slope", curve.fitted_slope, -0.65, -0.35});
    // Reported, not gated.
    std::cerr << "concentration: l1 slope " << io::format_double(curve.fitted_slope) << ", fluctuation slope "
              << io::format_double(curve.fluct_slope) << "\n";
  }

  io::CsvWriter csv({"suite", "check", "value", "lo", "hi", "pass"});
  bool all = true;
  json report = json::array();
  for (const auto& ch : checks) {
    csv.add(ch.suite).add(ch.name).add(ch.value).add(ch.lo).add(ch.hi).add(ch.pass() ? "pass" : "fail");
    csv.end_row();
    all = all && ch.pass();
    std::cout << (ch.pass() ? "PASS " : "FAIL ") << ch.suite << "/" << ch.name << " = " << io::format_double(ch.value)
              << "\n";
    report.push_back({{"suite", ch.suite}, {"check", ch.name}, {"value", ch.value}, {"pass", ch.pass()}});
  }
  run.write("validate.csv", csv.str());
  run.write_json("validate.json", {{"suite", v.suite}, {"passed", all}, {"checks", report}});
  run.finish();
  return all ? 0 : kExitValidation;
}

// ---- correlate ---------------------------------------------------------------------------

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

int cmd_correlate(const CLI::App* sub, const Common& c, const std::string& csv_in, const std::string& xcol,
                  const std::string& ycol, bool no_timestamp) {
  Run run(sub, c);
  const auto table = io::parse_csv(run.read_input(csv_in));
  const auto xs = table.numeric(xcol), ys = table.numeric(ycol);
  const auto fit = ols_pearson(xs, ys);
  json j{{"x", xcol},
         {"y", ycol},
         {"n", fit.n},
         {"slope", fit.slope},
         {"intercept", fit.intercept},
         {"pearson_r", fit.pearson_r},
         {"r_ci_low", fit.r_ci_low},
         {"r_ci_high", fit.r_ci_high},
         {"ci_level", 0.95}};
  io::ScatterPlot plot{ycol + " vs " + xcol, xcol, ycol, xs, ys, true, fit.slope, fit.intercept};
  run.write_json("fit.json", j);
  run.write("scatter.svg", io::render_svg(plot, no_timestamp ? "" : "generated " + utc_timestamp()));
  run.finish();
  return 0;
}

// ---- ablate ------------------------------------------------------------------------------

struct AblateFlags {
  std::string wins = "12,24,48,96";
  std::string sigma_ratios = "0.5,1,2";
  std::string hop_ratios = "0.25,0.5,1";
  std::vector<std::string> families{"random", "periodic", "poisson_gap"};
  std::string accels = "4";
  std::size_t acs = 12;
};

int cmd_ablate(const CLI::App* sub, const Common& c, const SliceSource& src, const AblateFlags& a) {
  Run run(sub, c);
  auto [data, ids] = load_slices(src, c.seed, run);
  selector::AblationGrid g;
  g.wins = parse_size_list(a.wins);
  g.sigma_ratios = parse_double_list(a.sigma_ratios);
  g.hop_ratios = parse_double_list(a.hop_ratios);
  g.families.clear();
  for (const auto& f : a.families) g.families.push_back(selector::parse_family(f));
  g.accels = parse_double_list(a.accels);
  const auto res = selector::ablation_sweep(data, g, a.acs, c.seed);

  io::CsvWriter sweep({"win", "sigma", "hop", "sigma_ratio", "hop_ratio", "family", "accel", "sample", "id",
                       "abs_delta_s", "skipped"});
  for (const auto& r : res.rows) {
    sweep.add(r.win).add(r.sigma).add(r.hop).add(r.sigma_ratio).add(r.hop_ratio).add(r.family).add(r.accel);
    sweep.add(r.sample).add(ids.at(r.sample));
    if (r.skipped)
      sweep.add("");
    else
      sweep.add(r.abs_delta_s);
    sweep.add(r.skipped ? 1 : 0);
    sweep.end_row();
  }
  io::CsvWriter cells({"win", "sigma_ratio", "hop_ratio", "family", "accel", "n", "mean", "min", "q25", "median",
                       "q75", "max", "skipped"});
  for (const auto& s : res.cells) {
    cells.add(s.win).add(s.sigma_ratio).add(s.hop_ratio).add(s.family).add(s.accel).add(s.n);
    if (s.skipped) {
      for (int i = 0; i < 6; ++i) cells.add("");
    } else {
      cells.add(s.mean).add(s.min).add(s.q25).add(s.median).add(s.q75).add(s.max);
    }
    cells.add(s.skipped ? 1 : 0);
    cells.end_row();
  }
  io::CsvWriter stab({"win_a", "win_b", "spearman", "n"});
  for (const auto& s : res.stability) {
    stab.add(s.win_a).add(s.win_b);
    if (s.n == 0)
      stab.add("");
    else
      stab.add(s.spearman);
    stab.add(s.n);
    stab.end_row();
  }
  run.write("sweep.csv", sweep.str());
  run.write("cells.csv", cells.str());
  run.write("stability.csv", stab.str());
  run.finish();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phasegate: phase-space entropy audits of sampling masks"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file mirroring the command-line flags, nested by subcommand");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", kToolVersion);

  Common common;

  auto* audit = app.add_subcommand("audit", "entropy change of masked or undersampled fields");
  std::vector<std::string> audit_inputs;
  std::string audit_domain = "image", audit_mask;
  MaskFlags audit_mf;
  HusimiFlags audit_h;
  add_common(audit, common);
  audit->add_option("--input,-i", audit_inputs, "ARR1 field files")->required();
  audit->add_option("--domain", audit_domain, "image | kspace")->check(CLI::IsMember({"image", "kspace"}));
  audit->add_option("--mask", audit_mask, "ARR1 mask file (overrides the inline spec)");
  audit->add_option("--family", audit_mf.family, "mask family");
  add_patch_flags(audit, audit_mf);
  add_line_flags(audit, audit_mf);
  add_husimi(audit, audit_h);

  auto* maskgen = app.add_subcommand("maskgen", "write a mask as ARR1 plus a JSON sidecar");
  MaskgenFlags mg;
  MaskFlags mg_mf;
  add_common(maskgen, common);
  maskgen->add_option("--kind", mg.kind, "patch | kspace | antenna")->check(CLI::IsMember({"patch", "kspace", "antenna"}));
  maskgen->add_option("--family", mg_mf.family, "mask family");
  maskgen->add_option("--patches", mg.patches, "patch rows (patch kind)");
  maskgen->add_option("--patch-cols", mg.patch_cols, "patch columns (default = --patches)");
  maskgen->add_option("--lines", mg.lines, "phase-encoding lines (kspace kind)");
  maskgen->add_option("--rows", mg.rows, "readout rows (kspace kind, default = lines)");
  maskgen->add_option("--nrx", mg.n_rx, "receive antennas");
  maskgen->add_option("--ntx", mg.n_tx, "transmit antennas");
  maskgen->add_option("--d", mg.d, "antenna deactivation interval");
  maskgen->add_option("--axis", mg.axis, "tx | rx | both");
  add_patch_flags(maskgen, mg_mf);
  add_line_flags(maskgen, mg_mf);

  auto* select = app.add_subcommand("select", "pick (alpha, beta) for parametric line masks");
  SliceSource sel_src;
  MaskFlags sel_mf;
  std::string sel_alphas, sel_betas, sel_crit = "all";
  HusimiFlags sel_h;
  add_common(select, common);
  add_slices(select, sel_src);
  add_line_flags(select, sel_mf);
  select->add_option("--alphas", sel_alphas, "comma-separated alpha grid");
  select->add_option("--betas", sel_betas, "comma-separated beta grid");
  select->add_option("--criterion", sel_crit, "entropy | kspace_l2 | psnr | all");
  add_husimi(select, sel_h);

  auto* mimo_cmd = app.add_subcommand("mimo", "antenna deactivation study on synthetic channels");
  mimo::StudyConfig study;
  std::string mimo_intervals = "2,3,4,6,8", mimo_axis = "tx";
  bool save_channels = false;
  HusimiFlags mimo_h;
  add_common(mimo_cmd, common);
  mimo_cmd->add_option("--nrx", study.channel.n_rx, "receive antennas");
  mimo_cmd->add_option("--ntx", study.channel.n_tx, "transmit antennas");
  mimo_cmd->add_option("--snr", study.channel.snr_db, "SNR in dB");
  mimo_cmd->add_option("--clusters", study.channel.n_clusters, "scattering clusters");
  mimo_cmd->add_option("--paths", study.channel.paths_per_cluster, "paths per cluster");
  mimo_cmd->add_option("--spread", study.channel.angular_spread_deg, "angular spread in degrees");
  mimo_cmd->add_option("--realizations", study.realizations, "channel draws");
  mimo_cmd->add_option("--intervals", mimo_intervals, "comma-separated deactivation intervals");
  mimo_cmd->add_option("--axis", mimo_axis, "tx | rx | both");
  mimo_cmd->add_option("--rank", study.rank_r, "completion rank");
  mimo_cmd->add_option("--iters", study.iters, "completion iterations");
  mimo_cmd->add_flag("--save-channels", save_channels, "write the noisy channels as ARR1");
  add_husimi(mimo_cmd, mimo_h);

  auto* validate = app.add_subcommand("validate", "run the phase-space theory checks");
  ValidateFlags vf;
  add_common(validate, common);
  validate->add_option("--suite", vf.suite, "wigner | folding | jensen | concentration | all");
  validate->add_option("--ns", vf.ns, "window counts for the concentration curve");
  validate->add_option("--trials", vf.trials, "Monte Carlo trials per count");
  validate->add_option("--rho", vf.rho, "Bernoulli keep probability");
  validate->add_option("--f0", vf.f0, "Lorentzian corner frequency of the test fields");
  validate->add_option("--win", vf.win, "window size");
  validate->add_option("--sigma", vf.sigma, "window width");
  validate->add_option("--hop", vf.hop, "window stride");

  auto* correlate = app.add_subcommand("correlate", "OLS fit and Pearson r between two CSV columns");
  std::string corr_csv, corr_x, corr_y;
  bool no_timestamp = false;
  add_common(correlate, common);
  correlate->add_option("--csv", corr_csv, "input CSV")->required();
  correlate->add_option("--x", corr_x, "x column")->required();
  correlate->add_option("--y", corr_y, "y column")->required();
  correlate->add_flag("--no-timestamp", no_timestamp, "omit the timestamp comment in the SVG");

  auto* ablate = app.add_subcommand("ablate", "Husimi parameter sweep over MRI line-mask families");
  SliceSource abl_src;
  AblateFlags af;
  add_common(ablate, common);
  add_slices(ablate, abl_src);
  ablate->add_option("--wins", af.wins, "comma-separated window sizes");
  ablate->add_option("--sigma-ratios", af.sigma_ratios, "sigma / win values");
  ablate->add_option("--hop-ratios", af.hop_ratios, "hop / win values");
  ablate->add_option("--families", af.families, "families, e.g. random periodic parametric:0.5:3");
  ablate->add_option("--accels", af.accels, "comma-separated acceleration factors");
  ablate->add_option("--acs", af.acs, "fully sampled centre lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    std::cerr << e.what() << "\n";
    return kExitIo;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParam;
  }

  try {
    if (*audit) return cmd_audit(audit, common, audit_inputs, audit_domain, audit_mask, audit_mf, audit_h);
    if (*maskgen) return cmd_maskgen(maskgen, common, mg, mg_mf);
    if (*select) return cmd_select(select, common, sel_src, sel_mf, sel_alphas, sel_betas, sel_crit, sel_h);
    if (*mimo_cmd) return cmd_mimo(mimo_cmd, common, study, mimo_intervals, mimo_axis, save_channels, mimo_h);
    if (*validate) return cmd_validate(validate, common, vf);
    if (*correlate) return cmd_correlate(correlate, common, corr_csv, corr_x, corr_y, no_timestamp);
    if (*ablate) return cmd_ablate(ablate, common, abl_src, af);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParam;
  }
  return kExitParam;
}
