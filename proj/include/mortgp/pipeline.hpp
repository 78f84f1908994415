#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mortgp/ga.hpp"
#include "mortgp/io.hpp"
#include "mortgp/synth.hpp"

namespace mortgp {

// Implementations behind the CLI subcommands. Each writes its result files
// plus one manifest.json into the output directory and returns the list of
// files written. Reruns with identical inputs produce byte-identical CSVs.

struct SynthArgs {
  std::string case_name;  // SYA | SYB | SYC
  uint64_t seed = 1;
  std::string out_dir;
};

struct FitArgs {
  std::string data_path;
  std::string kernel;  // DSL string
  bool hetero = false;
  std::optional<AgeYearRange> range;  // default: full file extent
  FitOptions options;
  std::string out_dir;
};

struct GaArgs {
  std::string data_path;
  std::string set_code = "r";  // r | f
  bool hetero = false;
  std::optional<AgeYearRange> range;
  GAConfig config;
  int refit_top_n = 30;
  std::string out_dir;
};

struct PredictArgs {
  std::string fit_path;
  int age_lo = 0, age_hi = 0;
  int year_lo = 0, year_hi = 0;
  int n_paths = 0;
  uint64_t seed = 1;
  std::optional<std::string> data_override;
  std::string out_dir;
};

struct GridsArgs {
  std::string fit_path;
  double anchor_age = 70;
  double anchor_year = 2010;
  std::optional<std::string> data_override;
  std::string out_dir;
};

struct ExperimentArgs {
  std::string name;  // smoothness | recovery | convergence
  std::string case_name;
  uint64_t seed = 1;
  int pop = 100, gens = 10;  // desk-scale GA defaults for recovery
  std::string set_code = "r";
  int workers = 4;
  int eta_long = 2000;
  std::string out_dir;
};

std::vector<std::string> cmd_synth(const SynthArgs& args);
std::vector<std::string> cmd_fit(const FitArgs& args);
std::vector<std::string> cmd_ga(const GaArgs& args);
std::vector<std::string> cmd_predict(const PredictArgs& args);
std::vector<std::string> cmd_grids(const GridsArgs& args);
std::vector<std::string> cmd_experiment(const ExperimentArgs& args);

// Fit-record (de)serialization used by predict/grids.
void write_fit_record(const FitResult& fit, const DatasetSpec& data_spec,
                      const std::string& dataset_hash, const std::string& path);

struct LoadedFit {
  FitResult fit;
  DatasetSpec data_spec;
  std::string dataset_hash;
};

LoadedFit read_fit_record(const std::string& path);

// Shared report writers (also exercised directly by the acceptance suite).
void write_ga_record_csv(const GARecord& record, const std::string& path);
void write_ranked_csv(const RankedKernels& ranked, const std::string& path);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);
void write_quantiles_csv(const std::vector<GenerationQuantiles>& rows, const std::string& path);
void write_sweep_csv(const SweepResult& sweep, const std::string& path);
void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::string& path);
void write_recovery_json(const RecoveryVerdict& verdict, const std::string& path);

}  // namespace mortgp
