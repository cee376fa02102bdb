#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ifspec/design_rules.hpp"
#include "ifspec/run_config.hpp"

namespace ifspec::cli {

struct CommandOptions {
  std::filesystem::path out;  // empty = config output_dir
  int threads = 0;            // 0 = config threads
  bool check = false;
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CommandReport {
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;

  bool all_pass() const;
};

CommandReport cmd_psd(const config::RunConfig& cfg, const CommandOptions& opt, std::ostream& log);
CommandReport cmd_design(const config::RunConfig& cfg, const CommandOptions& opt, std::ostream& log);
CommandReport cmd_xpm(const config::RunConfig& cfg, const CommandOptions& opt, std::ostream& log);

/// Dip of the shaped (Psi_2D) analytic PSD measured on a refined grid,
/// next to the closed-form width.
struct DipProbe {
  design::DipMeasurement measured;
  double predicted = 0.0;  // 2 / T_b'
  double dc_ratio = 0.0;   // continuous PSD at the first nonzero bin over the plateau
};

DipProbe probe_dip(const shaping::SourceSpec& source, const pulse::PulseSpec& pulse,
                   const pulse::FiberDispersion& fiber, std::size_t n_symbols, std::uint64_t seed,
                   int grid_factor = 8);

/// Closed-form dip inputs for a pulse and fiber.
design::DipModelInputs dip_inputs(int block_length, const pulse::PulseSpec& pulse,
                                  const pulse::FiberDispersion& fiber);

/// Grid point nearest `predicted` in log-rate, and whether `best` is that
/// point or one of its neighbors.
struct RateVerdict {
  double nearest = 0.0;
  bool pass = false;
};

RateVerdict judge_rate(const RVector& grid, double predicted, double best);

}  // namespace ifspec::cli
