#include "ifspec/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "ifspec/mc_engine.hpp"
#include "ifspec/psd_model.hpp"
#include "ifspec/report.hpp"
#include "ifspec/xpm_sim.hpp"
#include "json.hpp"

namespace ifspec::cli {

using nlohmann::json;
namespace fs = std::filesystem;

bool CommandReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

namespace {

template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t extra = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1))) - (n ? 1 : 0);
  for (std::size_t t = 0; t < extra; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

fs::path out_dir(const config::RunConfig& cfg, const CommandOptions& opt) {
  return opt.out.empty() ? fs::path(cfg.output_dir) : opt.out;
}

int thread_count(const config::RunConfig& cfg, const CommandOptions& opt) {
  return opt.threads > 0 ? opt.threads : cfg.threads;
}

report::Stamp stamp_for(const config::RunConfig& cfg, const std::string& scenario) {
  return {cfg.hash(), cfg.seed, scenario};
}

json manifest_head(const config::RunConfig& cfg, const std::string& command) {
  json m;
  m["command"] = command;
  m["scenario"] = cfg.scenario;
  m["config_hash"] = cfg.hash();
  m["seed"] = cfg.seed;
  m["config"] = json::parse(cfg.canonical);
  return m;
}

void finish(CommandReport& rep, json manifest, const fs::path& path, std::ostream& log) {
  json checks = json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    log << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  }
  manifest["checks"] = checks;
  json files = json::array();
  for (const auto& f : rep.files) files.push_back(f.lexically_relative(path.parent_path()).generic_string());
  manifest["files"] = files;
  report::write_text(path, manifest.dump(2) + "\n");
  rep.files.push_back(path);
}

std::string num(double v) { return report::fmt(v); }

std::string length_tag(double km) { return "L" + num(km); }

double median(RVector v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

std::size_t first_positive_bin(const RVector& freqs) {
  const auto it = std::upper_bound(freqs.begin(), freqs.end(), 0.0);
  if (it == freqs.end()) throw ModelError("grid has no positive frequencies");
  return static_cast<std::size_t>(it - freqs.begin());
}

double band_median(const RVector& freqs, const RVector& values, double lo, double hi) {
  RVector sel;
  for (std::size_t i = 0; i < freqs.size(); ++i)
    if (freqs[i] >= lo && freqs[i] <= hi) sel.push_back(values[i]);
  return median(std::move(sel));
}

double band_mean(const RVector& freqs, const RVector& values, double lo, double hi) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < freqs.size(); ++i)
    if (freqs[i] > lo && freqs[i] <= hi) {
      s += values[i];
      ++n;
    }
  return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

pulse::FiberDispersion fiber_of(const config::PsdConfig& c, double km) {
  pulse::FiberDispersion f;
  f.dispersion_ps_nm_km = c.dispersion_ps_nm_km;
  f.wavelength = c.wavelength;
  f.length = km * 1e3;
  return f;
}

// Analytic decomposition on a grid refined by `factor` over the Welch segment.
struct FineModel {
  psd::PsdDecomposition d;
  shaping::BlockStats stats;
  std::size_t grid = 0;
};

FineModel fine_model(const shaping::BlockStats& stats, const pulse::PulseSpec& pulse,
                     const pulse::FiberDispersion& fiber, int block_length, std::size_t base, int factor) {
  FineModel m;
  m.stats = stats;
  m.grid = base * static_cast<std::size_t>(factor);
  const auto model = psd::build_pulse_model(pulse, fiber, block_length, m.grid);
  m.d = psd::decompose(stats, model.beats, model.envelope, psd::NeighborWeight::Psi2d);
  return m;
}

}  // namespace

design::DipModelInputs dip_inputs(int block_length, const pulse::PulseSpec& pulse,
                                  const pulse::FiberDispersion& fiber) {
  design::DipModelInputs in;
  in.n_s = block_length;
  in.a = pulse::main_lobe_ratio(pulse.shape, pulse.rolloff);
  in.symbol_rate = 1.0 / pulse.symbol_period;
  in.kappa_beta = 1.0 + pulse.rolloff;
  in.dispersion = fiber.dispersion_ps_nm_km * kPsPerNmKm;
  in.length = fiber.length;
  in.wavelength = fiber.wavelength;
  return in;
}

DipProbe probe_dip(const shaping::SourceSpec& source, const pulse::PulseSpec& pulse,
                   const pulse::FiberDispersion& fiber, std::size_t n_symbols, std::uint64_t seed, int grid_factor) {
  const auto src = shaping::make_source(source, n_symbols, seed);
  const auto stats = shaping::block_stats(src.stream, src.constellation);
  const auto base = mc::default_segment(pulse, fiber, source.block_length);
  const auto m = fine_model(stats, pulse, fiber, source.block_length, base, grid_factor);
  DipProbe p;
  p.measured = design::measure_dip_width(m.d.freqs, m.d.total, pulse.symbol_period);
  p.predicted = design::dip_width(dip_inputs(source.block_length, pulse, fiber));
  p.dc_ratio = m.d.total[first_positive_bin(m.d.freqs)] / p.measured.plateau;
  return p;
}

RateVerdict judge_rate(const RVector& grid, double predicted, double best) {
  if (grid.empty()) throw ConfigError("empty rate grid");
  RVector g = grid;
  std::sort(g.begin(), g.end());
  std::size_t k = 0;
  for (std::size_t i = 1; i < g.size(); ++i)
    if (std::abs(std::log(g[i] / predicted)) < std::abs(std::log(g[k] / predicted))) k = i;
  RateVerdict v;
  v.nearest = g[k];
  for (std::size_t i = (k ? k - 1 : 0); i <= std::min(k + 1, g.size() - 1); ++i)
    if (g[i] == best) v.pass = true;
  return v;
}

// ---------------------------------------------------------------- psd

CommandReport cmd_psd(const config::RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  if (!cfg.psd) throw ConfigError("config has no psd section");
  const auto& c = *cfg.psd;
  const fs::path root = out_dir(cfg, opt) / "psd";

  struct Job {
    const config::SourceEntry* source;
    double km;
  };
  std::vector<Job> jobs;
  for (const auto& s : c.sources)
    for (double km : c.lengths_km) jobs.push_back({&s, km});

  struct Outcome {
    json summary;
    std::vector<fs::path> files;
    double deviation = 0.0;
    double dc_total = 0.0;
    double dc_self = 0.0;
    double low_band = 0.0;
    bool negative = false;
    double sum_residual = 0.0;
  };
  std::vector<Outcome> results(jobs.size());

  parallel_for(jobs.size(), thread_count(cfg, opt), [&](std::size_t i) {
    const auto& job = jobs[i];
    const auto& spec = job.source->spec;
    const std::string tag = job.source->name + "_" + length_tag(job.km);
    const auto stamp = stamp_for(cfg, tag);
    const auto fiber = fiber_of(c, job.km);
    const fs::path dir = root / tag;
    auto& out = results[i];
    json s;
    s["name"] = tag;
    s["source"] = {{"order", spec.order},
                   {"method", shaping::to_string(spec.method)},
                   {"target_rate", spec.target_rate},
                   {"block_length", spec.block_length}};
    s["length_km"] = job.km;

    const std::size_t base = c.segment_len ? c.segment_len : mc::default_segment(c.pulse, fiber, spec.block_length);
    shaping::BlockStats stats;
    if (c.monte_carlo) {
      mc::ScenarioSpec sc;
      sc.name = tag;
      sc.source = spec;
      sc.pulse = c.pulse;
      sc.fiber = fiber;
      sc.n_symbols = c.n_symbols;
      sc.seed = cfg.seed;
      sc.segment_len = base;
      const auto r = mc::run_psd_scenario(sc);
      stats = r.stats;
      s["information_rate"] = r.information_rate;
      s["band_Hz"] = {r.fmin, r.fmax};
      s["deviation_1d_dB"] = r.deviation_1d_db;
      s["deviation_2d_dB"] = r.deviation_2d_db;
      s["truncation"] = r.truncation;
      s["tail_dB"] = r.tail_db;
      s["grid"] = r.grid;
      out.deviation = r.deviation_2d_db;
      const auto path = dir / "decomposition.csv";
      report::write_decomposition_csv(
          path, r.decomposition, {{"analytic_1d", &r.analytic_1d}, {"analytic_2d", &r.analytic_2d}, {"mc", &r.mc}},
          stamp);
      report::write_lines_csv(dir / "lines.csv", r.decomposition.lines, stamp);
      out.files = {path, dir / "lines.csv"};
      out.negative = psd::find_negative(r.analytic_2d.freqs, r.analytic_2d.values).has_value();
    } else {
      const auto src = shaping::make_source(spec, c.n_symbols, cfg.seed);
      stats = shaping::block_stats(src.stream, src.constellation);
      s["information_rate"] = src.information_rate;
    }
    s["stats"] = {{"mu_E", stats.mu_E},        {"sigma_E2", stats.sigma_E2}, {"mu_sigma_blk2", stats.mu_sigma_blk2},
                  {"sigma_mu_blk2", stats.sigma_mu_blk2}, {"c_corr", stats.c_corr}, {"psi_2d", stats.psi_2d}};

    const auto fine = fine_model(stats, c.pulse, fiber, spec.block_length, base, c.fine_grid_factor);
    const auto& d = fine.d;
    const auto fpath = dir / "fine_decomposition.csv";
    report::write_decomposition_csv(fpath, d, {}, stamp);
    out.files.push_back(fpath);
    if (!c.monte_carlo) {
      report::write_lines_csv(dir / "lines.csv", d.lines, stamp);
      out.files.push_back(dir / "lines.csv");
    }
    out.negative = out.negative || psd::find_negative(d.freqs, d.total).has_value();
    for (std::size_t k = 0; k < d.total.size(); ++k) {
      const double sum = d.self_beating[k] + d.shaping_correction[k] + d.neighbor_beating[k];
      const double scale = std::max({std::abs(d.self_beating[k]), std::abs(d.neighbor_beating[k]), 1e-300});
      out.sum_residual = std::max(out.sum_residual, std::abs(sum - d.total[k]) / scale);
    }
    const std::size_t i0 = first_positive_bin(d.freqs);
    const double T = c.pulse.symbol_period;
    const auto in0 = dip_inputs(spec.block_length, c.pulse, fiber_of(c, 0.0));
    out.dc_total = d.total[i0];
    out.dc_self = d.self_beating[i0];
    out.low_band = band_mean(d.freqs, d.total, 0.0, 0.5 / design::block_duration(in0));
    const double plateau = band_median(d.freqs, d.total, 0.1 / T, 0.3 / T);
    s["fine_grid"] = fine.grid;
    s["first_bin_Hz"] = d.freqs[i0];
    s["first_bin_total"] = out.dc_total;
    s["first_bin_self"] = out.dc_self;
    s["plateau"] = plateau;
    s["low_band_mean"] = out.low_band;
    s["dip_width_predicted_Hz"] = design::dip_width(dip_inputs(spec.block_length, c.pulse, fiber));
    try {
      const auto dip = design::measure_dip_width(d.freqs, d.total, T);
      s["dip_width_measured_Hz"] = dip.width;
    } catch (const ModelError&) {
      s["dip_width_measured_Hz"] = nullptr;
    }
    out.summary = s;
    log << "psd " << tag << " done\n";
  });

  CommandReport rep;
  json scenarios = json::array();
  for (auto& r : results) {
    scenarios.push_back(r.summary);
    rep.files.insert(rep.files.end(), r.files.begin(), r.files.end());
  }

  if (opt.check) {
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const auto& r = results[i];
      const std::string tag = jobs[i].source->name + "_" + length_tag(jobs[i].km);
      if (c.monte_carlo)
        rep.checks.push_back({tag + ": analytic vs Monte-Carlo", r.deviation <= c.tolerance_db,
                              "band-mean " + num(r.deviation) + " dB, limit " + num(c.tolerance_db) + " dB"});
      rep.checks.push_back({tag + ": nonnegative", !r.negative, r.negative ? "negative bin found" : "ok"});
      rep.checks.push_back({tag + ": components sum to total", r.sum_residual <= 1e-9,
                            "max relative residual " + num(r.sum_residual)});
      const auto& spec = jobs[i].source->spec;
      if (spec.method == shaping::ShapingMethod::Ccdm && spec.block_length > 1 && jobs[i].km == 0.0) {
        const double gap = to_db(r.dc_self) - to_db(std::max(r.dc_total, 1e-300));
        rep.checks.push_back({tag + ": DC dip below self term", gap >= 20.0, num(gap) + " dB below, need 20"});
      }
    }
    // ESS pedestal falls with block length; low band rises with length.
    std::map<std::string, std::vector<std::pair<int, double>>> by_block;
    std::map<std::string, std::vector<std::pair<double, double>>> by_length;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const auto& spec = jobs[i].source->spec;
      if (spec.method == shaping::ShapingMethod::Ess) {
        const std::string key = std::to_string(spec.order) + "_" + num(spec.target_rate) + "_" + length_tag(jobs[i].km);
        by_block[key].push_back({spec.block_length, results[i].dc_total});
      }
      if (spec.block_length > 1) by_length[jobs[i].source->name].push_back({jobs[i].km, results[i].low_band});
    }
    for (auto& [key, v] : by_block) {
      if (v.size() < 2) continue;
      std::sort(v.begin(), v.end());
      bool ok = true;
      std::string detail;
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k && !(v[k].second < v[k - 1].second)) ok = false;
        detail += (k ? ", " : "") + std::string("n_s=") + std::to_string(v[k].first) + ": " + num(v[k].second);
      }
      rep.checks.push_back({"ESS " + key + ": DC pedestal decreasing in n_s", ok, detail});
    }
    for (auto& [key, v] : by_length) {
      if (v.size() < 2) continue;
      std::sort(v.begin(), v.end());
      bool ok = true;
      std::string detail;
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (k && !(v[k].second > v[k - 1].second)) ok = false;
        detail += (k ? ", " : "") + length_tag(v[k].first) + ": " + num(v[k].second);
      }
      rep.checks.push_back({key + ": low-frequency level rising with L", ok, detail});
    }
  }

  auto m = manifest_head(cfg, "psd");
  m["scenarios"] = scenarios;
  finish(rep, m, root / "manifest.json", log);
  return rep;
}

// ---------------------------------------------------------------- design

CommandReport cmd_design(const config::RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  if (!cfg.design) throw ConfigError("config has no design section");
  const auto& c = *cfg.design;
  const fs::path root = out_dir(cfg, opt) / "design";
  const auto stamp = stamp_for(cfg, cfg.scenario);

  auto inputs = [&](int n_s, double km, double gbaud) {
    design::DipModelInputs in;
    in.n_s = n_s;
    in.a = c.a ? *c.a : pulse::main_lobe_ratio(c.shape, c.rolloff);
    in.symbol_rate = gbaud * 1e9;
    in.kappa_beta = 1.0 + c.rolloff;
    in.dispersion = c.dispersion_ps_nm_km * kPsPerNmKm;
    in.length = km * 1e3;
    in.wavelength = c.wavelength;
    design::validate(in);
    return in;
  };

  std::vector<design::PresetName> presets{design::PresetName::ThisWorkShaped, design::PresetName::ThisWorkUnshaped};
  if (c.spacing_ratio) {
    presets.push_back(design::PresetName::Poggiolini);
    presets.push_back(design::PresetName::Wang);
  }
  auto preset_rates = [&](const design::DipModelInputs& in) {
    RVector r;
    for (auto p : presets)
      r.push_back(in.length > 0 ? design::general_rate(design::make_preset(p, in, c.spacing_ratio), in) / 1e9
                                : std::numeric_limits<double>::infinity());
    return r;
  };

  CommandReport rep;
  std::vector<std::string> cols{"n_s",          "L_km",           "R_GBd",
                                "T_b_s",        "T_b_prime_s",    "dip_width_Hz",
                                "R_opt_GBd",    "R_opt_unshaped_GBd", "R_numeric_GBd"};
  for (auto p : presets) cols.push_back("R_" + design::to_string(p) + "_GBd");
  report::CsvWriter table(root / "table.csv", stamp, cols);

  double worst_argmax = 0.0;
  double worst_unshaped = 0.0;
  bool width_monotone = true;
  bool ropt_monotone = true;
  std::string width_detail = "ok";
  std::string ropt_detail = "ok";
  std::map<double, std::vector<double>> widths_by_length;  // at the first rate

  for (double gbaud : c.rates_gbaud) {
    for (double km : c.lengths_km) {
      double prev_width = std::numeric_limits<double>::infinity();
      double prev_ropt = 0.0;
      for (int n_s : c.block_lengths) {
        const auto in = inputs(n_s, km, gbaud);
        const double ropt = n_s > 1 ? design::opt_rate_shaped(in) : design::opt_rate_unshaped(in);
        const double rnum = km > 0 ? design::numeric_opt_rate(in) : std::numeric_limits<double>::infinity();
        const double width = design::dip_width(in);
        std::vector<double> row{double(n_s),
                                km,
                                gbaud,
                                design::block_duration(in),
                                design::dispersed_duration(in),
                                width,
                                ropt / 1e9,
                                design::opt_rate_unshaped(in) / 1e9,
                                rnum / 1e9};
        const auto pr = preset_rates(in);
        row.insert(row.end(), pr.begin(), pr.end());
        table.row(row);
        if (km > 0) {
          worst_argmax = std::max(worst_argmax, std::abs(rnum - design::opt_rate_shaped(in)) / design::opt_rate_shaped(in));
          if (!(ropt > prev_ropt)) {
            ropt_monotone = false;
            ropt_detail = "not increasing at n_s=" + std::to_string(n_s) + ", L=" + num(km) + " km";
          }
          prev_ropt = ropt;
        }
        if (n_s == 1 && km > 0) {
          const double g = design::general_rate(design::make_preset(design::PresetName::ThisWorkUnshaped, in), in);
          const double u = design::opt_rate_unshaped(in);
          worst_unshaped = std::max({worst_unshaped, std::abs(design::opt_rate_shaped(in) - u) / u, std::abs(g - u) / u});
        }
        if (!(width < prev_width)) {
          width_monotone = false;
          width_detail = "not decreasing in n_s at n_s=" + std::to_string(n_s) + ", L=" + num(km) + " km";
        }
        prev_width = width;
        if (gbaud == c.rates_gbaud.front()) widths_by_length[km].push_back(width);
      }
    }
  }
  table.close();
  rep.files.push_back(root / "table.csv");

  // Width spread across block lengths at each length, first rate.
  report::CsvWriter conv(root / "convergence.csv", stamp, {"L_km", "max_over_min_width"});
  RVector spreads;
  for (auto& [km, w] : widths_by_length) {
    const double spread = *std::max_element(w.begin(), w.end()) / *std::min_element(w.begin(), w.end());
    spreads.push_back(spread);
    conv.row(std::vector<double>{km, spread});
  }
  conv.close();
  rep.files.push_back(root / "convergence.csv");
  for (std::size_t i = 1; i < c.lengths_km.size(); ++i) {
    for (int n_s : c.block_lengths) {
      const auto a = inputs(n_s, c.lengths_km[i - 1], c.rates_gbaud.front());
      const auto b = inputs(n_s, c.lengths_km[i], c.rates_gbaud.front());
      if (c.lengths_km[i] > c.lengths_km[i - 1] && !(design::dip_width(b) < design::dip_width(a))) {
        width_monotone = false;
        width_detail = "not decreasing in L at n_s=" + std::to_string(n_s);
      }
    }
  }

  std::vector<std::string> ocols{"n_s", "N_spans", "L_km", "R_opt_GBd"};
  for (auto p : presets) ocols.push_back("R_" + design::to_string(p) + "_GBd");
  report::CsvWriter optima(root / "optima.csv", stamp, ocols);
  for (int n_s : c.block_lengths)
    for (int n : c.span_counts) {
      const double km = n * c.span_km;
      const auto in = inputs(n_s, km, c.rates_gbaud.front());
      const double ropt = n_s > 1 ? design::opt_rate_shaped(in) : design::opt_rate_unshaped(in);
      std::vector<double> row{double(n_s), double(n), km, ropt / 1e9};
      const auto pr = preset_rates(in);
      row.insert(row.end(), pr.begin(), pr.end());
      optima.row(row);
    }
  optima.close();
  rep.files.push_back(root / "optima.csv");
  log << "design tables written\n";

  if (opt.check) {
    rep.checks.push_back({"closed-form rate equals numeric argmax", worst_argmax <= 1e-6,
                          "worst relative error " + num(worst_argmax)});
    rep.checks.push_back({"n_s = 1 row equals unshaped law", worst_unshaped <= 1e-12,
                          "worst relative error " + num(worst_unshaped)});
    rep.checks.push_back({"dip width decreasing in n_s and L", width_monotone, width_detail});
    rep.checks.push_back({"optimal rate increasing in n_s", ropt_monotone, ropt_detail});
    bool conv_ok = true;
    std::string detail;
    std::size_t k = 0;
    for (auto& [km, w] : widths_by_length) {
      (void)w;
      if (k && spreads[k] > spreads[k - 1]) conv_ok = false;
      if (c.converged_by_km && km >= *c.converged_by_km && spreads[k] > 1.10) conv_ok = false;
      detail += (k ? ", " : "") + length_tag(km) + ": " + num(spreads[k]);
      ++k;
    }
    rep.checks.push_back({"widths converge with L", conv_ok, detail});
  }

  finish(rep, manifest_head(cfg, "design"), root / "manifest.json", log);
  return rep;
}

// ---------------------------------------------------------------- xpm

CommandReport cmd_xpm(const config::RunConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  if (!cfg.xpm) throw ConfigError("config has no xpm section");
  const auto& c = *cfg.xpm;
  const fs::path root = out_dir(cfg, opt) / "xpm";

  auto link_for = [&](double alpha) {
    auto l = c.link;
    l.alpha_db_km = alpha;
    xpm::validate(l);
    return l;
  };
  auto plan_for = [&](const config::SourceEntry& pump) {
    auto p = c.plan;
    p.pump_source = pump.spec;
    xpm::validate(p);
    return p;
  };
  auto run = [&](const xpm::ChannelPlan& p, const xpm::LinkSpec& l) {
    return c.converge ? xpm::run_converged(p, l, cfg.seed) : xpm::run_pump_probe(p, l, cfg.seed);
  };

  struct Job {
    double alpha;
    const config::SourceEntry* pump;
  };
  std::vector<Job> jobs;
  for (double a : c.alphas_db_km)
    for (const auto& p : c.pumps) jobs.push_back({a, &p});
  std::vector<xpm::PhaseNoiseResult> results(jobs.size());
  std::vector<std::vector<fs::path>> files(jobs.size());

  parallel_for(jobs.size(), thread_count(cfg, opt), [&](std::size_t i) {
    const auto& job = jobs[i];
    const std::string tag = job.pump->name + "_a" + num(job.alpha);
    const auto stamp = stamp_for(cfg, tag);
    results[i] = run(plan_for(*job.pump), link_for(job.alpha));
    const auto& r = results[i];
    const auto vpath = root / (tag + "_variance.csv");
    report::CsvWriter v(vpath, stamp, {"span", "variance_rad2"});
    for (std::size_t s = 0; s < r.per_span_variance.size(); ++s)
      v.row(std::vector<double>{double(s + 1), r.per_span_variance[s]});
    v.close();
    std::vector<std::string> cols{"f_Hz"};
    for (std::size_t s = 0; s < r.phase_psd.size(); ++s) cols.push_back("span" + std::to_string(s + 1));
    const auto ppath = root / (tag + "_phase_psd.csv");
    report::CsvWriter pp(ppath, stamp, cols);
    for (std::size_t k = 0; k < r.phase_psd.front().size(); ++k) {
      std::vector<double> row{r.phase_psd.front().freqs[k]};
      for (const auto& curve : r.phase_psd) row.push_back(curve.values[k]);
      pp.row(row);
    }
    pp.close();
    files[i] = {vpath, ppath};
    log << "xpm " << tag << " done (step " << num(r.step) << " m)\n";
  });

  CommandReport rep;
  json runs = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& r = results[i];
    runs.push_back({{"pump", jobs[i].pump->name},
                    {"alpha_db_km", jobs[i].alpha},
                    {"information_rate", r.information_rate},
                    {"step_m", r.step},
                    {"samples_per_symbol", r.samples_per_symbol},
                    {"grid", r.grid},
                    {"per_span_variance", r.per_span_variance}});
    rep.files.insert(rep.files.end(), files[i].begin(), files[i].end());
  }

  auto find = [&](double alpha, const std::string& name) -> const xpm::PhaseNoiseResult& {
    for (std::size_t i = 0; i < jobs.size(); ++i)
      if (jobs[i].alpha == alpha && jobs[i].pump->name == name) return results[i];
    throw ConfigError("no run for pump " + name);
  };

  if (opt.check) {
    for (double alpha : c.alphas_db_km)
      for (const auto& rule : c.ranks) {
        const auto& lo = find(alpha, rule.lower).per_span_variance;
        const auto& hi = find(alpha, rule.upper).per_span_variance;
        bool ok = true;
        std::string detail;
        for (int s = rule.from_span; s <= rule.to_span; ++s) {
          const auto k = static_cast<std::size_t>(s - 1);
          if (!(lo[k] <= hi[k])) ok = false;
          detail += (s > rule.from_span ? ", " : "") + std::string("span ") + std::to_string(s) + ": " + num(lo[k]) +
                    (lo[k] <= hi[k] ? " <= " : " > ") + num(hi[k]);
        }
        rep.checks.push_back({rule.lower + " <= " + rule.upper + " (alpha " + num(alpha) + ")", ok, detail});
      }
  }

  json nulls = json::object();
  if (c.null_tests) {
    constexpr double floor = 1e-12;
    auto l = link_for(c.alphas_db_km.front());
    l.n_spans = 1;
    auto p = plan_for(c.pumps.front());
    p.pump_power = 0.0;
    const double off = xpm::run_pump_probe(p, l, cfg.seed).per_span_variance.front();
    auto l0 = l;
    l0.n2 = 0.0;
    const double linear = xpm::run_pump_probe(plan_for(c.pumps.front()), l0, cfg.seed).per_span_variance.front();
    nulls = {{"pump_off_variance", off}, {"zero_gamma_variance", linear}, {"floor", floor}};
    if (opt.check) {
      rep.checks.push_back({"pump off gives no phase noise", off < floor, num(off) + " rad^2"});
      rep.checks.push_back({"zero nonlinearity gives no phase noise", linear < floor, num(linear) + " rad^2"});
    }
    log << "xpm null tests done\n";
  }

  json sweeps = json::array();
  if (c.sweep) {
    const auto& sw = *c.sweep;
    const config::SourceEntry* pump = nullptr;
    for (const auto& p : c.pumps)
      if (p.name == sw.pump) pump = &p;
    RVector rates;
    for (double g : sw.rates_gbaud) rates.push_back(g * 1e9);
    for (double alpha : c.alphas_db_km) {
      const auto res = xpm::sweep_symbol_rate(plan_for(*pump), rates, link_for(alpha), sw.spans, cfg.seed, c.converge);
      const std::string tag = "sweep_" + sw.pump + "_a" + num(alpha);
      std::vector<std::string> cols{"R_GBd"};
      for (int n : sw.spans) cols.push_back("N" + std::to_string(n) + "_variance_rad2");
      report::CsvWriter w(root / (tag + ".csv"), stamp_for(cfg, tag), cols);
      for (std::size_t r = 0; r < rates.size(); ++r) {
        std::vector<double> row{rates[r] / 1e9};
        row.insert(row.end(), res.variance[r].begin(), res.variance[r].end());
        w.row(row);
      }
      w.close();
      rep.files.push_back(root / (tag + ".csv"));

      json entries = json::array();
      for (std::size_t k = 0; k < sw.spans.size(); ++k) {
        design::DipModelInputs in;
        in.n_s = sw.predict_block_length;
        in.a = sw.a ? *sw.a : pulse::main_lobe_ratio(pulse::PulseShape::RootRaisedCosine, c.plan.rolloff);
        in.kappa_beta = 1.0 + c.plan.rolloff;
        in.dispersion = c.link.dispersion_ps_nm_km * kPsPerNmKm;
        in.wavelength = c.link.wavelength;
        in.length = sw.spans[k] * c.link.span_length;
        const double predicted = in.n_s > 1 ? design::opt_rate_shaped(in) : design::opt_rate_unshaped(in);
        const auto verdict = judge_rate(rates, predicted, res.best_rate[k]);
        entries.push_back({{"spans", sw.spans[k]},
                           {"best_GBd", res.best_rate[k] / 1e9},
                           {"predicted_GBd", predicted / 1e9},
                           {"nearest_GBd", verdict.nearest / 1e9},
                           {"pass", verdict.pass}});
        if (opt.check)
          rep.checks.push_back({"sweep " + sw.pump + " N=" + std::to_string(sw.spans[k]) + " (alpha " + num(alpha) + ")",
                                verdict.pass,
                                "best " + num(res.best_rate[k] / 1e9) + " GBd, predicted " + num(predicted / 1e9) +
                                    " GBd, nearest grid " + num(verdict.nearest / 1e9) + " GBd"});
      }
      if (opt.check && sw.spans.size() > 1) {
        bool ok = true;
        for (std::size_t k = 1; k < sw.spans.size(); ++k)
          if (sw.spans[k] > sw.spans[k - 1] && res.best_rate[k] > res.best_rate[k - 1]) ok = false;
        rep.checks.push_back({"sweep " + sw.pump + ": minimizer non-increasing in N (alpha " + num(alpha) + ")", ok,
                              ok ? "ok" : "minimizer rises with N"});
      }
      sweeps.push_back({{"pump", sw.pump}, {"alpha_db_km", alpha}, {"results", entries}});
      log << "xpm " << tag << " done\n";
    }
  }

  auto m = manifest_head(cfg, "xpm");
  m["runs"] = runs;
  m["null_tests"] = nulls;
  m["sweeps"] = sweeps;
  finish(rep, m, root / "manifest.json", log);
  return rep;
}

}  // namespace ifspec::cli
