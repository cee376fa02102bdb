#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ifspec/block_stream.hpp"
#include "ifspec/pulsefield.hpp"
#include "ifspec/xpm_sim.hpp"

namespace ifspec::config {

struct SourceEntry {
  std::string name;
  shaping::SourceSpec spec;
};

struct PsdConfig {
  std::vector<SourceEntry> sources;
  RVector lengths_km{0.0};
  pulse::PulseSpec pulse;
  double dispersion_ps_nm_km = 16.0;
  double wavelength = 1550e-9;
  std::size_t n_symbols = 1u << 17;
  std::size_t segment_len = 0;  // 0 = automatic
  bool monte_carlo = true;
  int fine_grid_factor = 8;     // analytic-only grid refinement for DC metrics
  double tolerance_db = 1.0;
};

struct DesignConfig {
  std::vector<int> block_lengths{1, 9, 18, 27};
  RVector lengths_km{0.0, 640.0};
  RVector rates_gbaud{32.0};
  pulse::PulseShape shape = pulse::PulseShape::RootRaisedCosine;
  double rolloff = 0.1;
  std::optional<double> a;  // main-lobe ratio; default from the pulse shape
  double dispersion_ps_nm_km = 16.0;
  double wavelength = 1550e-9;
  double span_km = 80.0;
  std::vector<int> span_counts{3, 10, 27};
  std::optional<double> spacing_ratio;  // delta f / R for the literature presets
  std::optional<double> converged_by_km;  // width spread across n_s checked <= 10% from here on
};

struct RankRule {
  std::string lower;
  std::string upper;
  int from_span = 1;
  int to_span = 1;
};

struct SweepConfig {
  std::string pump;
  RVector rates_gbaud{2, 4, 8, 16, 32};
  std::vector<int> spans{3};
  int predict_block_length = 1;  // 1 = unshaped law
  std::optional<double> a;  // main-lobe ratio; default from the pump pulse
};

struct XpmConfig {
  std::vector<SourceEntry> pumps;
  xpm::LinkSpec link;
  xpm::ChannelPlan plan;
  RVector alphas_db_km{0.2};
  bool converge = true;
  bool null_tests = false;
  std::vector<RankRule> ranks;
  std::optional<SweepConfig> sweep;
};

struct RunConfig {
  std::string scenario = "unnamed";
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int threads = 1;
  std::optional<PsdConfig> psd;
  std::optional<DesignConfig> design;
  std::optional<XpmConfig> xpm;
  std::string canonical;  // normalized JSON of the effective configuration

  /// FNV-1a of the canonical text.
  std::string hash() const;
};

/// Parses JSON text. Errors carry the source name and the offending key
/// path (or line and column for syntax errors).
RunConfig parse(const std::string& text, const std::string& source_name = "<config>");

RunConfig load(const std::filesystem::path& path);

/// Replaces the seed and refreshes the canonical text.
void override_seed(RunConfig& cfg, std::uint64_t seed);

}  // namespace ifspec::config
