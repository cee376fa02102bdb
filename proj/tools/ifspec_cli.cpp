// ifspec: intensity-fluctuation PSD, design rules and XPM pump-probe runs.
//
//   ifspec psd    --config presets/dc_behavior.json --out results --check
//   ifspec design --config presets/optimal_rates.json
//   ifspec xpm    --config presets/xpm_ranks.json --threads 4 --check
//
// Exit codes: 0 ok, 1 runtime error, 2 config error, 3 step convergence
// failure, 4 acceptance check failed.

#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "ifspec/commands.hpp"

namespace {

enum Exit { kOk = 0, kRuntime = 1, kConfig = 2, kConvergence = 3, kCheck = 4 };

struct Args {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  bool check = false;
};

void add_common(CLI::App* sub, Args& a) {
  sub->add_option("--config", a.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", a.out, "output directory (overrides output_dir)");
  sub->add_option("--seed", a.seed, "RNG seed (overrides seed)");
  sub->add_option("--threads", a.threads, "worker threads (overrides threads)")->check(CLI::PositiveNumber);
  sub->add_flag("--check", a.check, "evaluate acceptance checks; exit 4 on failure");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intensity-fluctuation spectra of block-shaped QAM"};
  app.require_subcommand(1);
  Args args;
  auto* psd = app.add_subcommand("psd", "analytic and Monte-Carlo PSD scenarios");
  auto* design = app.add_subcommand("design", "dip-width and optimal-rate tables");
  auto* xpm = app.add_subcommand("xpm", "pump-probe XPM phase-noise runs");
  for (auto* s : {psd, design, xpm}) add_common(s, args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    auto cfg = ifspec::config::load(args.config);
    if (args.seed) ifspec::config::override_seed(cfg, *args.seed);
    ifspec::cli::CommandOptions opt;
    opt.out = args.out;
    opt.threads = args.threads;
    opt.check = args.check;

    ifspec::cli::CommandReport rep;
    if (psd->parsed()) rep = ifspec::cli::cmd_psd(cfg, opt, std::cerr);
    else if (design->parsed()) rep = ifspec::cli::cmd_design(cfg, opt, std::cerr);
    else rep = ifspec::cli::cmd_xpm(cfg, opt, std::cerr);

    for (const auto& f : rep.files) std::cout << f.string() << "\n";
    if (args.check && !rep.all_pass()) return kCheck;
    return kOk;
  } catch (const ifspec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ifspec::GridError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ifspec::ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return kConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
