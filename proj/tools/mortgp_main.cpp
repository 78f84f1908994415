#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "mortgp/errors.hpp"
#include "mortgp/pipeline.hpp"
#include "mortgp/version.hpp"

using namespace mortgp;

namespace {

struct RangeFlags {
  std::vector<int> ages;   // lo hi
  std::vector<int> years;  // lo hi
};

void add_range_flags(CLI::App* cmd, RangeFlags& flags) {
  cmd->add_option("--ages", flags.ages, "Age range: LO HI (default: full file extent)")
      ->expected(2);
  cmd->add_option("--years", flags.years, "Year range: LO HI (default: full file extent)")
      ->expected(2);
}

std::optional<AgeYearRange> resolve_range_flags(const std::string& path, const RangeFlags& flags) {
  if (flags.ages.empty() && flags.years.empty()) return std::nullopt;
  AgeYearRange r = csv_extent(path);
  if (!flags.ages.empty()) {
    r.age_lo = flags.ages[0];
    r.age_hi = flags.ages[1];
  }
  if (!flags.years.empty()) {
    r.year_lo = flags.years[0];
    r.year_hi = flags.years[1];
  }
  return r;
}

void add_fit_option_flags(CLI::App* cmd, FitOptions& opts) {
  cmd->add_option("--lr", opts.learning_rate, "Optimizer learning rate")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", opts.tolerance, "Convergence tolerance epsilon")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", opts.max_iterations, "Maximum optimizer iterations")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional GP kernel search for mortality surfaces"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // ---- synth
  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic mortality surface");
  synth_cmd->add_option("--case", synth.case_name, "SYA | SYB | SYC")->required();
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();

  // ---- fit
  FitArgs fit_args;
  RangeFlags fit_range;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one kernel to a mortality CSV");
  fit_cmd->add_option("--data", fit_args.data_path, "Mortality CSV (age,year,deaths,exposures)")
      ->required();
  fit_cmd->add_option("--kernel", fit_args.kernel, "Kernel DSL, e.g. \"mul(RBF_a, RBF_y)\"")
      ->required();
  fit_cmd->add_flag("--hetero", fit_args.hetero, "Use sigma^2 / deaths observation noise");
  add_range_flags(fit_cmd, fit_range);
  add_fit_option_flags(fit_cmd, fit_args.options);
  fit_cmd->add_option("--seed", fit_args.options.rng_seed, "Random seed");
  fit_cmd->add_option("--out", fit_args.out_dir, "Output directory")->required();

  // ---- ga
  GaArgs ga_args;
  RangeFlags ga_range;
  auto* ga_cmd = app.add_subcommand("ga", "Run the genetic kernel search");
  ga_cmd->add_option("--data", ga_args.data_path, "Mortality CSV")->required();
  ga_cmd->add_option("--set", ga_args.set_code, "Search set: r (restricted) or f (full)");
  ga_cmd->add_flag("--hetero", ga_args.hetero, "Use sigma^2 / deaths observation noise");
  add_range_flags(ga_cmd, ga_range);
  ga_cmd->add_option("--pop", ga_args.config.population, "Population size per generation");
  ga_cmd->add_option("--gens", ga_args.config.generations, "Number of generations");
  ga_cmd->add_option("--tournament", ga_args.config.tournament_size, "Tournament size");
  ga_cmd->add_option("--seed", ga_args.config.master_seed, "Master seed");
  ga_cmd->add_option("--workers", ga_args.config.workers, "Parallel fit workers");
  ga_cmd->add_option("--refit-top", ga_args.refit_top_n, "Kernels to refit tightly (0 disables)");
  add_fit_option_flags(ga_cmd, ga_args.config.fit_options);
  ga_cmd->set_config("--config", "", "Config file with key=value lines mirroring these flags");

  // ---- predict
  PredictArgs predict_args;
  std::vector<int> predict_ages, predict_years;
  std::string predict_data_override;
  auto* predict_cmd = app.add_subcommand("predict", "Posterior surface from a saved fit");
  predict_cmd->add_option("--fit", predict_args.fit_path, "fit.json from the fit command")
      ->required();
  predict_cmd->add_option("--ages", predict_ages, "Age range: LO HI")->expected(2)->required();
  predict_cmd->add_option("--years", predict_years, "Year range: LO HI")->expected(2)->required();
  predict_cmd->add_option("--paths", predict_args.n_paths, "Sampled posterior paths to emit");
  predict_cmd->add_option("--seed", predict_args.seed, "Path sampling seed");
  predict_cmd->add_option("--data", predict_data_override, "Override the dataset path");
  predict_cmd->add_option("--out", predict_args.out_dir, "Output directory")->required();

  // ---- grids
  GridsArgs grids_args;
  std::vector<double> anchor;
  std::string grids_data_override;
  auto* grids_cmd = app.add_subcommand("grids", "Residual and prior-correlation grids");
  grids_cmd->add_option("--fit", grids_args.fit_path, "fit.json from the fit command")->required();
  grids_cmd->add_option("--anchor", anchor, "Anchor cell: AGE YEAR (default 70 2010)")->expected(2);
  grids_cmd->add_option("--data", grids_data_override, "Override the dataset path");
  grids_cmd->add_option("--out", grids_args.out_dir, "Output directory")->required();

  // ---- experiment
  ExperimentArgs exp_args;
  auto* exp_cmd = app.add_subcommand("experiment", "One-shot experiment drivers");
  exp_cmd->add_option("--name", exp_args.name, "smoothness | recovery | convergence")->required();
  exp_cmd->add_option("--case", exp_args.case_name, "SYA | SYB | SYC")->required();
  exp_cmd->add_option("--seed", exp_args.seed, "Random seed");
  exp_cmd->add_option("--pop", exp_args.pop, "GA population (recovery)");
  exp_cmd->add_option("--gens", exp_args.gens, "GA generations (recovery)");
  exp_cmd->add_option("--set", exp_args.set_code, "Search set: r or f (recovery)");
  exp_cmd->add_option("--workers", exp_args.workers, "Parallel fit workers");
  exp_cmd->add_option("--eta-long", exp_args.eta_long, "Long-run iterations (convergence)");
  exp_cmd->add_option("--out", exp_args.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*synth_cmd) {
      cmd_synth(synth);
    } else if (*fit_cmd) {
      fit_args.range = resolve_range_flags(fit_args.data_path, fit_range);
      cmd_fit(fit_args);
    } else if (*ga_cmd) {
      ga_args.range = resolve_range_flags(ga_args.data_path, ga_range);
      cmd_ga(ga_args);
    } else if (*predict_cmd) {
      predict_args.age_lo = predict_ages[0];
      predict_args.age_hi = predict_ages[1];
      predict_args.year_lo = predict_years[0];
      predict_args.year_hi = predict_years[1];
      if (!predict_data_override.empty()) predict_args.data_override = predict_data_override;
      cmd_predict(predict_args);
    } else if (*grids_cmd) {
      if (!anchor.empty()) {
        grids_args.anchor_age = anchor[0];
        grids_args.anchor_year = anchor[1];
      }
      if (!grids_data_override.empty()) grids_args.data_override = grids_data_override;
      cmd_grids(grids_args);
    } else if (*exp_cmd) {
      cmd_experiment(exp_args);
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const KernelParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
