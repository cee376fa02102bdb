#include "ifspec/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ifspec/report.hpp"
#include "json.hpp"

namespace ifspec::config {

using nlohmann::json;

namespace {

struct Source {
  std::string name;
  std::string text;
};

// Best-effort line of a dotted key path: each key is searched as a quoted
// string after the previous match. Array indices are skipped.
int locate_line(const std::string& text, const std::string& path) {
  std::size_t pos = 0;
  bool found = false;
  std::size_t start = 0;
  while (start <= path.size()) {
    std::size_t end = path.find('.', start);
    if (end == std::string::npos) end = path.size();
    std::string key = path.substr(start, end - start);
    if (const auto br = key.find('['); br != std::string::npos) key.resize(br);
    if (!key.empty()) {
      const auto hit = text.find("\"" + key + "\"", pos);
      if (hit == std::string::npos) break;
      pos = hit;
      found = true;
    }
    start = end + 1;
  }
  if (!found) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

std::string where(const Source& src, const std::string& path) {
  const int line = path.empty() ? 0 : locate_line(src.text, path);
  std::string s = src.name;
  if (line > 0) s += ":" + std::to_string(line);
  return s + ": " + (path.empty() ? "<root>" : path);
}

class Reader {
 public:
  Reader(const json& j, std::string path, const Source& source) : j_(j), path_(std::move(path)), source_(source) {
    if (!j_.is_object()) fail("expected an object");
  }

  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError(where(source_, sub(key)) + ": unknown key");
  }

  [[noreturn]] void fail(const std::string& msg, const std::string& key = "") const {
    throw ConfigError(where(source_, key.empty() ? path_ : sub(key)) + ": " + msg);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    if (!has(key)) return fallback;
    return as<T>(j_.at(key), key);
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) fail("missing required key", key);
    return as<T>(j_.at(key), key);
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    return Reader(j_.at(key), sub(key), source_);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const Source& source() const { return source_; }

 private:
  template <class T>
  T as(const json& v, const std::string& key) const {
    try {
      return v.get<T>();
    } catch (const json::exception& e) {
      fail(std::string("wrong type (") + e.what() + ")", key);
    }
  }

  const json& j_;
  std::string path_;
  const Source& source_;
  std::set<std::string> seen_;
};

shaping::ShapingMethod method_of(Reader& r, const std::string& key) {
  const auto s = r.get<std::string>(key, "iid");
  try {
    return shaping::parse_shaping_method(s);
  } catch (const ConfigError& e) {
    r.fail(e.what(), key);
  }
}

SourceEntry parse_source(Reader r) {
  SourceEntry e;
  e.name = r.require<std::string>("name");
  e.spec.order = r.get<int>("order", 64);
  e.spec.method = method_of(r, "method");
  e.spec.target_rate = r.get<double>("rate", 0.0);
  e.spec.block_length = r.get<int>("block_length", 1);
  if (e.spec.block_length < 1) r.fail("must be at least 1", "block_length");
  return e;
}

std::vector<SourceEntry> parse_sources(Reader& parent, const std::string& key) {
  const auto& arr = parent.raw(key);
  if (!arr.is_array() || arr.empty()) parent.fail("expected a nonempty array", key);
  std::vector<SourceEntry> out;
  std::set<std::string> names;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(parse_source(Reader(arr[i], parent.sub(key) + "[" + std::to_string(i) + "]", parent.source())));
    if (!names.insert(out.back().name).second) parent.fail("duplicate name '" + out.back().name + "'", key);
  }
  return out;
}

pulse::PulseSpec parse_pulse(Reader r) {
  pulse::PulseSpec p;
  try {
    p.shape = pulse::parse_pulse_shape(r.get<std::string>("shape", "rrc"));
  } catch (const ConfigError& e) {
    r.fail(e.what(), "shape");
  }
  p.rolloff = r.get<double>("rolloff", 0.1);
  p.symbol_period = 1.0 / (r.get<double>("symbol_rate_gbaud", 32.0) * 1e9);
  p.samples_per_symbol = r.get<int>("samples_per_symbol", 8);
  p.span_symbols = r.get<int>("span_symbols", 0);
  if (p.span_symbols == 0) p.span_symbols = pulse::min_span_symbols(p.shape, p.rolloff);
  return p;
}

PsdConfig parse_psd(Reader r) {
  PsdConfig c;
  c.sources = parse_sources(r, "sources");
  c.lengths_km = r.get<RVector>("lengths_km", c.lengths_km);
  if (r.has("pulse")) c.pulse = parse_pulse(r.child("pulse"));
  else c.pulse.span_symbols = pulse::min_span_symbols(c.pulse.shape, c.pulse.rolloff);
  c.dispersion_ps_nm_km = r.get<double>("dispersion_ps_nm_km", c.dispersion_ps_nm_km);
  c.wavelength = r.get<double>("wavelength_nm", 1550.0) * 1e-9;
  c.n_symbols = r.get<std::size_t>("n_symbols", c.n_symbols);
  c.segment_len = r.get<std::size_t>("segment_len", 0);
  c.monte_carlo = r.get<bool>("monte_carlo", true);
  c.fine_grid_factor = r.get<int>("fine_grid_factor", c.fine_grid_factor);
  c.tolerance_db = r.get<double>("tolerance_db", c.tolerance_db);
  for (double l : c.lengths_km)
    if (l < 0.0) r.fail("lengths must be nonnegative", "lengths_km");
  if (c.fine_grid_factor < 1 || !is_power_of_two(static_cast<std::size_t>(c.fine_grid_factor)))
    r.fail("must be a power of two", "fine_grid_factor");
  return c;
}

DesignConfig parse_design(Reader r) {
  DesignConfig c;
  c.block_lengths = r.get<std::vector<int>>("block_lengths", c.block_lengths);
  c.lengths_km = r.get<RVector>("lengths_km", c.lengths_km);
  c.rates_gbaud = r.get<RVector>("rates_gbaud", c.rates_gbaud);
  try {
    c.shape = pulse::parse_pulse_shape(r.get<std::string>("shape", "rrc"));
  } catch (const ConfigError& e) {
    r.fail(e.what(), "shape");
  }
  c.rolloff = r.get<double>("rolloff", c.rolloff);
  if (r.has("a")) c.a = r.get<double>("a", 1.0);
  c.dispersion_ps_nm_km = r.get<double>("dispersion_ps_nm_km", c.dispersion_ps_nm_km);
  c.wavelength = r.get<double>("wavelength_nm", 1550.0) * 1e-9;
  c.span_km = r.get<double>("span_km", c.span_km);
  c.span_counts = r.get<std::vector<int>>("span_counts", c.span_counts);
  if (r.has("spacing_ratio")) c.spacing_ratio = r.get<double>("spacing_ratio", 1.0);
  if (r.has("converged_by_km")) c.converged_by_km = r.get<double>("converged_by_km", 0.0);
  return c;
}

XpmConfig parse_xpm(Reader r) {
  XpmConfig c;
  c.pumps = parse_sources(r, "pumps");
  if (r.has("link")) {
    auto l = r.child("link");
    c.link.span_length = l.get<double>("span_km", 80.0) * 1e3;
    c.link.n_spans = l.get<int>("n_spans", c.link.n_spans);
    c.link.dispersion_ps_nm_km = l.get<double>("dispersion_ps_nm_km", c.link.dispersion_ps_nm_km);
    c.link.n2 = l.get<double>("n2", c.link.n2);
    c.link.a_eff = l.get<double>("a_eff_um2", 80.0) * 1e-12;
    c.link.wavelength = l.get<double>("wavelength_nm", 1550.0) * 1e-9;
    c.link.amplifiers = l.get<bool>("amplifiers", true);
  }
  if (r.has("plan")) {
    auto p = r.child("plan");
    c.plan.pump_power = p.get<double>("pump_power_mw", 1.0) * 1e-3;
    c.plan.probe_power = p.get<double>("probe_power_uw", 10.0) * 1e-6;
    c.plan.spacing = p.get<double>("spacing_ghz", 50.0) * 1e9;
    c.plan.symbol_rate = p.get<double>("symbol_rate_gbaud", 32.0) * 1e9;
    c.plan.rolloff = p.get<double>("rolloff", c.plan.rolloff);
    c.plan.n_symbols = p.get<std::size_t>("n_symbols", c.plan.n_symbols);
    c.plan.samples_per_symbol = p.get<int>("samples_per_symbol", 0);
  }
  c.alphas_db_km = r.get<RVector>("alphas_db_km", c.alphas_db_km);
  c.converge = r.get<bool>("converge", c.converge);
  c.null_tests = r.get<bool>("null_tests", c.null_tests);
  std::set<std::string> names;
  for (const auto& p : c.pumps) names.insert(p.name);
  if (r.has("ranks")) {
    const auto& arr = r.raw("ranks");
    if (!arr.is_array()) r.fail("expected an array", "ranks");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader q(arr[i], r.sub("ranks") + "[" + std::to_string(i) + "]", r.source());
      RankRule rule;
      rule.lower = q.require<std::string>("lower");
      rule.upper = q.require<std::string>("upper");
      rule.from_span = q.get<int>("from_span", c.link.n_spans);
      rule.to_span = q.get<int>("to_span", c.link.n_spans);
      if (!names.count(rule.lower)) q.fail("unknown pump '" + rule.lower + "'", "lower");
      if (!names.count(rule.upper)) q.fail("unknown pump '" + rule.upper + "'", "upper");
      if (rule.from_span < 1 || rule.to_span < rule.from_span || rule.to_span > c.link.n_spans)
        q.fail("span range outside the link", "from_span");
      c.ranks.push_back(rule);
    }
  }
  if (r.has("sweep")) {
    auto s = r.child("sweep");
    SweepConfig sw;
    sw.pump = s.require<std::string>("pump");
    if (!names.count(sw.pump)) s.fail("unknown pump '" + sw.pump + "'", "pump");
    sw.rates_gbaud = s.get<RVector>("rates_gbaud", sw.rates_gbaud);
    sw.spans = s.get<std::vector<int>>("spans", sw.spans);
    sw.predict_block_length = s.get<int>("predict_block_length", sw.predict_block_length);
    if (s.has("a")) sw.a = s.get<double>("a", 1.0);
    c.sweep = sw;
  }
  return c;
}

json canonical_json(const json& in, std::uint64_t seed) {
  json j = in;
  j["seed"] = seed;
  return j;
}

}  // namespace

std::string RunConfig::hash() const { return report::fnv1a_hex(canonical); }

RunConfig parse(const std::string& text, const std::string& source_name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  RunConfig c;
  const Source src{source_name, text};
  {
    Reader r(j, "", src);
    c.scenario = r.get<std::string>("scenario", c.scenario);
    c.seed = r.get<std::uint64_t>("seed", c.seed);
    c.output_dir = r.get<std::string>("output_dir", c.output_dir);
    c.threads = r.get<int>("threads", c.threads);
    if (c.threads < 1) r.fail("must be at least 1", "threads");
    if (r.has("psd")) c.psd = parse_psd(r.child("psd"));
    if (r.has("design")) c.design = parse_design(r.child("design"));
    if (r.has("xpm")) c.xpm = parse_xpm(r.child("xpm"));
    if (!c.psd && !c.design && !c.xpm) r.fail("config has none of psd, design, xpm");
  }
  c.canonical = canonical_json(j, c.seed).dump();
  return c;
}

RunConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void override_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.canonical = canonical_json(json::parse(cfg.canonical), seed).dump();
}

}  // namespace ifspec::config
