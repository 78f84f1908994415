#include "mortgp/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mortgp/errors.hpp"
#include "mortgp/linalg.hpp"
#include "mortgp/version.hpp"

namespace mortgp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path prepare_out_dir(const std::string& dir) {
  if (dir.empty()) throw UsageError("output directory must be given");
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& config,
                    const std::string& dataset_hash, uint64_t master_seed,
                    std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["dataset_hash"] = dataset_hash;
  m["master_seed"] = master_seed;
  m["tool_version"] = kVersion;
  m["created_at"] = iso_now();
  m["outputs"] = outputs;
  const fs::path path = dir / "manifest.json";
  write_text(path, m.dump(2) + "\n");
  outputs.push_back(path.string());
}

AgeYearRange resolve_range(const std::string& path, const std::optional<AgeYearRange>& given) {
  return given ? *given : csv_extent(path);
}

json range_json(const AgeYearRange& r) {
  return json{{"age", {r.age_lo, r.age_hi}}, {"year", {r.year_lo, r.year_hi}}};
}

AgeYearRange range_from_json(const json& j) {
  AgeYearRange r;
  r.age_lo = j.at("age")[0];
  r.age_hi = j.at("age")[1];
  r.year_lo = j.at("year")[0];
  r.year_hi = j.at("year")[1];
  return r;
}

}  // namespace

// --------------------------------------------------------------- fit record

void write_fit_record(const FitResult& fit, const DatasetSpec& data_spec,
                      const std::string& dataset_hash, const std::string& path) {
  json rec;
  rec["kernel"] = {{"structural", format_structural(fit.expr)},
                   {"canonical", fit.canonical},
                   {"fitted", fit.fitted_string()}};
  rec["mll"] = fit.mll;
  rec["bic"] = fit.bic;
  rec["iterations"] = fit.n_iterations;
  rec["converged"] = fit.converged;
  rec["n_obs"] = fit.n_obs;
  rec["n_hyperparams"] = fit.n_hyperparams();

  json params = json::array();
  for (const ParamReport& row : report_params(fit, fit.scaling)) {
    params.push_back({{"name", row.name},
                      {"value", row.value},
                      {"reported", row.reported},
                      {"scaled_axis", row.scaled_axis}});
  }
  rec["params"] = params;
  rec["theta"] = std::vector<double>(fit.theta.data(), fit.theta.data() + fit.theta.size());

  json ds;
  ds["path"] = data_spec.path;
  ds["hash"] = dataset_hash;
  ds["noise_mode"] = noise_mode_name(data_spec.noise_mode);
  ds["range"] = range_json(data_spec.range);
  json scaling = json::array();
  for (int c = 0; c < 3; ++c) {
    scaling.push_back({fit.scaling.minmax[c].first, fit.scaling.minmax[c].second});
  }
  ds["scaling"] = scaling;
  rec["dataset"] = ds;

  write_text(path, rec.dump(2) + "\n");
}

LoadedFit read_fit_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open fit record '" + path + "'");
  json rec;
  try {
    in >> rec;
  } catch (const json::exception& e) {
    throw DataError("bad fit record '" + path + "': " + e.what());
  }
  LoadedFit out;
  out.fit.expr = parse_kernel(rec.at("kernel").at("structural").get<std::string>());
  out.fit.canonical = rec.at("kernel").at("canonical").get<std::string>();
  out.fit.layout = ModelLayout::of(out.fit.expr);
  const auto theta = rec.at("theta").get<std::vector<double>>();
  if (static_cast<int>(theta.size()) != out.fit.layout.dim()) {
    throw DataError("fit record theta does not match the kernel layout");
  }
  out.fit.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size());
  out.fit.mll = rec.at("mll").get<double>();
  out.fit.bic = rec.at("bic").get<double>();
  out.fit.n_iterations = rec.at("iterations").get<int>();
  out.fit.converged = rec.at("converged").get<bool>();
  out.fit.n_obs = rec.at("n_obs").get<int>();
  out.fit.failed = false;

  const json& ds = rec.at("dataset");
  out.data_spec.path = ds.at("path").get<std::string>();
  out.dataset_hash = ds.at("hash").get<std::string>();
  out.data_spec.noise_mode = noise_mode_from_name(ds.at("noise_mode").get<std::string>());
  out.data_spec.range = range_from_json(ds.at("range"));
  for (int c = 0; c < 3; ++c) {
    out.fit.scaling.minmax[c] = {ds.at("scaling")[c][0].get<double>(),
                                 ds.at("scaling")[c][1].get<double>()};
  }
  out.fit.noise_mode = out.data_spec.noise_mode;
  return out;
}

// ------------------------------------------------------------ CSV writers

void write_ga_record_csv(const GARecord& record, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot write '" + path + "'");
  std::fputs("generation,slot,canonical,kernel,bic,operation,ancestor1,ancestor2,op_seed\n", f);
  for (size_t g = 0; g < record.generations.size(); ++g) {
    const auto& gen = record.generations[g];
    for (size_t i = 0; i < gen.size(); ++i) {
      const GASlot& s = gen[i];
      std::fprintf(f, "%zu,%zu,\"%s\",\"%s\",%s,%s,%d,%d,%llu\n", g, i, s.canonical.c_str(),
                   format_structural(s.expr).c_str(), num(s.bic).c_str(), ga_op_name(s.op),
                   s.ancestor1, s.ancestor2, static_cast<unsigned long long>(s.op_seed));
    }
  }
  std::fclose(f);
}

void write_ranked_csv(const RankedKernels& ranked, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot write '" + path + "'");
  std::fputs("rank,canonical,kernel,fitted,bic,bf,evidence,duplicates,length,leaves\n", f);
  const double best = ranked.entries.empty() ? 0.0 : ranked.entries.front().best->bic;
  for (size_t i = 0; i < ranked.entries.size(); ++i) {
    const RankedEntry& e = ranked.entries[i];
    const double bf = bayes_factor(e.best->bic, best);
    const EvidenceResult ev = jeffreys_category(bf);
    std::fprintf(f, "%zu,\"%s\",\"%s\",\"%s\",%s,%s,%s,%d,%d,%d\n", i + 1, e.canonical.c_str(),
                 format_structural(e.best->expr).c_str(), e.best->fitted_string().c_str(),
                 num(e.best->bic).c_str(), num(bf).c_str(), evidence_code(ev.category),
                 e.duplicate_count, e.best->expr.length(), e.best->expr.n_leaves());
  }
  std::fclose(f);
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot write '" + path + "'");
  std::fputs(
      "range_lo,range_hi,bic_max,bic_min,len,addtv_comps,pct_nonstat,"
      "num_age,num_year,num_coh,pct_rough_age,pct_rough_year,pct_rough_coh\n",
      f);
  for (const SummaryRow& r : rows) {
    std::fprintf(f, "%d,%d,%s,%s,%s,%s,%s,%s,%s,%s,%s,%s,%s\n", r.lo, r.hi, num(r.bic_max).c_str(),
                 num(r.bic_min).c_str(), num(r.mean_leaves).c_str(), num(r.mean_comps).c_str(),
                 num(r.pct_nonstationary).c_str(), num(r.mean_age).c_str(),
                 num(r.mean_year).c_str(), num(r.mean_cohort).c_str(),
                 num(r.pct_rough_age).c_str(), num(r.pct_rough_year).c_str(),
                 num(r.pct_rough_cohort).c_str());
  }
  std::fclose(f);
}

void write_quantiles_csv(const std::vector<GenerationQuantiles>& rows, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot write '" + path + "'");
  std::fputs("generation,min,q99,q975,q95,q90\n", f);
  for (const auto& r : rows) {
    std::fprintf(f, "%d,%s,%s,%s,%s,%s\n", r.generation, num(r.min).c_str(), num(r.q99).c_str(),
                 num(r.q975).c_str(), num(r.q95).c_str(), num(r.q90).c_str());
  }
  std::fclose(f);
}

void write_sweep_csv(const SweepResult& sweep, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot write '" + path + "'");
  std::fputs("year_family,M12_a,M32_a,M52_a,RBF_a\n", f);
  const auto& fams = SweepResult::families();
  for (int iy = 0; iy < 4; ++iy) {
    std::fprintf(f, "%s_y", family_name(fams[iy]));
    for (int ia = 0; ia < 4; ++ia) {
      std::fprintf(f, ",%s", num(sweep.cells[iy][ia].log_bf).c_str());
    }
    std::fputs("\n", f);
  }
  std::fclose(f);
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw DataError("cannot write '" + path + "'");
  std::fputs("epsilon,eta,bic\n", f);
  for (const auto& r : rows) {
    std::fprintf(f, "%s,%d,%s\n", num(r.epsilon).c_str(), r.eta, num(r.bic_at_eta).c_str());
  }
  std::fclose(f);
}

void write_recovery_json(const RecoveryVerdict& verdict, const std::string& path) {
  json j;
  j["truth_canonical"] = verdict.truth_canonical;
  j["truth_rank"] = verdict.truth_rank;
  j["truth_bf"] = verdict.truth_bf;
  json top = json::array();
  for (const RecoveryEntry& e : verdict.top) {
    top.push_back({{"rank", e.rank},
                   {"canonical", e.canonical},
                   {"bic", e.bic},
                   {"bf_vs_best", e.bf_vs_best},
                   {"class_match", e.class_match},
                   {"exact", e.exact}});
  }
  j["top"] = top;
  write_text(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------- commands

std::vector<std::string> cmd_synth(const SynthArgs& args) {
  const fs::path dir = prepare_out_dir(args.out_dir);
  const SyntheticSpec spec = builtin_spec(args.case_name);
  MortalityDataset ds = generate_surface(spec, args.seed);

  std::vector<std::string> outputs;
  const fs::path surface = dir / "surface.csv";
  write_dataset_csv(ds, surface.string());
  outputs.push_back(surface.string());

  const fs::path truth = dir / "truth.txt";
  write_text(truth, format_structural(spec.expr) + "\n" + spec.fitted_string() + "\n");
  outputs.push_back(truth.string());

  json config;
  config["case"] = args.case_name;
  config["seed"] = args.seed;
  config["noise_mode"] = noise_mode_name(spec.noise_mode);
  config["truth"] = format_structural(spec.expr);
  config["rows"] = ds.n();
  write_manifest(dir, "synth", config, file_content_hash(surface.string()), args.seed, outputs);
  return outputs;
}

std::vector<std::string> cmd_fit(const FitArgs& args) {
  const fs::path dir = prepare_out_dir(args.out_dir);
  KernelExpr expr = parse_kernel(args.kernel);
  const NoiseMode mode = args.hetero ? NoiseMode::ByDeaths : NoiseMode::Homoskedastic;
  DatasetSpec spec{args.data_path, resolve_range(args.data_path, args.range), mode};
  LoadResult loaded = load_csv(spec.path, spec.range, spec.noise_mode);
  for (const std::string& w : loaded.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  FitResult result = fit(expr, loaded.dataset, args.options);
  if (result.failed) {
    throw NumericalError("fit failed: no likelihood evaluation succeeded");
  }

  std::vector<std::string> outputs;
  const std::string hash = file_content_hash(spec.path);
  const fs::path record = dir / "fit.json";
  write_fit_record(result, spec, hash, record.string());
  outputs.push_back(record.string());

  json config;
  config["data"] = args.data_path;
  config["kernel"] = args.kernel;
  config["noise_mode"] = noise_mode_name(mode);
  config["lr"] = args.options.learning_rate;
  config["tol"] = args.options.tolerance;
  config["max_iter"] = args.options.max_iterations;
  config["seed"] = args.options.rng_seed;
  config["range"] = range_json(spec.range);
  write_manifest(dir, "fit", config, hash, args.options.rng_seed, outputs);
  return outputs;
}

std::vector<std::string> cmd_ga(const GaArgs& args) {
  const fs::path dir = prepare_out_dir(args.out_dir);
  const NoiseMode mode = args.hetero ? NoiseMode::ByDeaths : NoiseMode::Homoskedastic;
  DatasetSpec spec{args.data_path, resolve_range(args.data_path, args.range), mode};
  LoadResult loaded = load_csv(spec.path, spec.range, spec.noise_mode);
  for (const std::string& w : loaded.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  GAConfig config = args.config;
  config.search_set = SearchSet::from_code(args.set_code);
  GARecord record = run_ga(config, gp_fitness(loaded.dataset, config.fit_options));

  RankedKernels ranked = rank_and_dedup(record.slot_results());
  std::vector<std::string> warnings;
  if (args.refit_top_n > 0) {
    FitOptions tight = refit_options(config.master_seed);
    tight.learning_rate = config.fit_options.learning_rate;
    ranked = refit_top(ranked, args.refit_top_n, tight, loaded.dataset, config.workers, &warnings);
  }
  for (const std::string& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

  std::vector<std::string> outputs;
  const fs::path record_path = dir / "ga_record.csv";
  write_ga_record_csv(record, record_path.string());
  outputs.push_back(record_path.string());

  const fs::path ranked_path = dir / "ranked.csv";
  write_ranked_csv(ranked, ranked_path.string());
  outputs.push_back(ranked_path.string());

  const fs::path summary_path = dir / "summary.csv";
  write_summary_csv(summary_table(ranked, {{1, 10}, {1, 50}, {51, 100}}, &warnings),
                    summary_path.string());
  outputs.push_back(summary_path.string());

  const fs::path quantiles_path = dir / "quantiles.csv";
  write_quantiles_csv(generation_quantiles(record), quantiles_path.string());
  outputs.push_back(quantiles_path.string());

  // fitted parameters for the final refit top-K
  json top = json::array();
  const int k = std::min<int>(args.refit_top_n > 0 ? args.refit_top_n : 10,
                              static_cast<int>(ranked.entries.size()));
  for (int i = 0; i < k; ++i) {
    const RankedEntry& e = ranked.entries[i];
    json entry;
    entry["rank"] = i + 1;
    entry["canonical"] = e.canonical;
    entry["kernel"] = format_structural(e.best->expr);
    entry["fitted"] = e.best->fitted_string();
    entry["bic"] = e.best->bic;
    entry["mll"] = e.best->mll;
    json params = json::array();
    for (const ParamReport& row : report_params(*e.best, loaded.dataset.scaling)) {
      params.push_back({{"name", row.name},
                        {"value", row.value},
                        {"reported", row.reported},
                        {"scaled_axis", row.scaled_axis}});
    }
    entry["params"] = params;
    top.push_back(entry);
  }
  const fs::path top_path = dir / "top_params.json";
  write_text(top_path, top.dump(2) + "\n");
  outputs.push_back(top_path.string());

  const std::string hash = file_content_hash(spec.path);
  json cj;
  cj["data"] = args.data_path;
  cj["set"] = args.set_code;
  cj["noise_mode"] = noise_mode_name(mode);
  cj["population"] = config.population;
  cj["generations"] = config.generations;
  cj["tournament_size"] = config.tournament_size;
  cj["parsimony_d"] = config.parsimony_d;
  cj["seed"] = config.master_seed;
  cj["workers"] = config.workers;
  cj["refit_top"] = args.refit_top_n;
  cj["lr"] = config.fit_options.learning_rate;
  cj["tol"] = config.fit_options.tolerance;
  cj["max_iter"] = config.fit_options.max_iterations;
  cj["range"] = range_json(spec.range);
  write_manifest(dir, "ga", cj, hash, config.master_seed, outputs);
  return outputs;
}

namespace {

MortalityDataset reload_fit_dataset(const LoadedFit& lf,
                                    const std::optional<std::string>& override_path) {
  DatasetSpec spec = lf.data_spec;
  if (override_path) spec.path = *override_path;
  LoadResult loaded = load_csv(spec.path, spec.range, spec.noise_mode);
  const std::string hash = file_content_hash(spec.path);
  if (!override_path && hash != lf.dataset_hash) {
    throw DataError("dataset '" + spec.path + "' does not match the hash in the fit record");
  }
  return std::move(loaded.dataset);
}

}  // namespace

std::vector<std::string> cmd_predict(const PredictArgs& args) {
  const fs::path dir = prepare_out_dir(args.out_dir);
  LoadedFit lf = read_fit_record(args.fit_path);
  MortalityDataset data = reload_fit_dataset(lf, args.data_override);

  if (args.age_lo > args.age_hi || args.year_lo > args.year_hi) {
    throw UsageError("empty prediction grid");
  }
  const int n_ages = args.age_hi - args.age_lo + 1;
  const int n_years = args.year_hi - args.year_lo + 1;
  Eigen::MatrixXd Xstar(n_ages * n_years, 3);
  for (int ia = 0; ia < n_ages; ++ia) {
    for (int iy = 0; iy < n_years; ++iy) {
      Xstar.row(ia * n_years + iy) =
          scale_point(lf.fit.scaling, args.age_lo + ia, args.year_lo + iy);
    }
  }

  Posterior post = posterior(lf.fit.expr, lf.fit.theta, data, Xstar);
  Eigen::MatrixXd paths;
  if (args.n_paths > 0) {
    paths = sample_mvn(post.mean, post.cov, args.n_paths, args.seed);
  }

  std::vector<std::string> outputs;
  const fs::path grid_path = dir / "predict.csv";
  std::FILE* f = std::fopen(grid_path.string().c_str(), "w");
  if (!f) throw DataError("cannot write '" + grid_path.string() + "'");
  std::fputs("age,year,mean,sd,lo90,hi90", f);
  for (int p = 0; p < args.n_paths; ++p) std::fprintf(f, ",path%d", p + 1);
  std::fputs("\n", f);
  for (int ia = 0; ia < n_ages; ++ia) {
    for (int iy = 0; iy < n_years; ++iy) {
      const int i = ia * n_years + iy;
      const double sd = std::sqrt(std::max(post.cov(i, i), 0.0));
      std::fprintf(f, "%d,%d,%s,%s,%s,%s", args.age_lo + ia, args.year_lo + iy,
                   num(post.mean[i]).c_str(), num(sd).c_str(),
                   num(post.mean[i] - 1.645 * sd).c_str(), num(post.mean[i] + 1.645 * sd).c_str());
      for (int p = 0; p < args.n_paths; ++p) std::fprintf(f, ",%s", num(paths(i, p)).c_str());
      std::fputs("\n", f);
    }
  }
  std::fclose(f);
  outputs.push_back(grid_path.string());

  json config;
  config["fit"] = args.fit_path;
  config["ages"] = {args.age_lo, args.age_hi};
  config["years"] = {args.year_lo, args.year_hi};
  config["paths"] = args.n_paths;
  config["seed"] = args.seed;
  write_manifest(dir, "predict", config, lf.dataset_hash, args.seed, outputs);
  return outputs;
}

std::vector<std::string> cmd_grids(const GridsArgs& args) {
  const fs::path dir = prepare_out_dir(args.out_dir);
  LoadedFit lf = read_fit_record(args.fit_path);
  MortalityDataset data = reload_fit_dataset(lf, args.data_override);

  const auto& ages = data.unique_ages;
  const auto& years = data.unique_years;
  const bool anchor_ok =
      args.anchor_age >= ages.front() && args.anchor_age <= ages.back() &&
      args.anchor_year >= years.front() && args.anchor_year <= years.back();
  if (!anchor_ok) throw DataError("anchor cell lies outside the training grid");

  Eigen::MatrixXd resid = residual_grid(lf.fit.expr, lf.fit.theta, data);
  Eigen::MatrixXd corr = prior_correlation_slice(lf.fit.expr, lf.fit.theta, lf.fit.scaling, ages,
                                                 years, args.anchor_age, args.anchor_year);

  auto write_grid = [&](const fs::path& path, const Eigen::MatrixXd& grid, const char* column) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw DataError("cannot write '" + path.string() + "'");
    std::fprintf(f, "age,year,%s\n", column);
    for (size_t ia = 0; ia < ages.size(); ++ia) {
      for (size_t iy = 0; iy < years.size(); ++iy) {
        std::fprintf(f, "%d,%d,%s\n", ages[ia], years[iy], num(grid(ia, iy)).c_str());
      }
    }
    std::fclose(f);
  };

  std::vector<std::string> outputs;
  const fs::path resid_path = dir / "residuals.csv";
  write_grid(resid_path, resid, "residual");
  outputs.push_back(resid_path.string());
  const fs::path corr_path = dir / "prior_correlation.csv";
  write_grid(corr_path, corr, "correlation");
  outputs.push_back(corr_path.string());

  json config;
  config["fit"] = args.fit_path;
  config["anchor"] = {args.anchor_age, args.anchor_year};
  write_manifest(dir, "grids", config, lf.dataset_hash, 0, outputs);
  return outputs;
}

std::vector<std::string> cmd_experiment(const ExperimentArgs& args) {
  const fs::path dir = prepare_out_dir(args.out_dir);
  std::vector<std::string> outputs;
  json config;
  config["name"] = args.name;
  config["case"] = args.case_name;
  config["seed"] = args.seed;

  if (args.name == "smoothness") {
    if (args.case_name != "SYA") {
      throw UsageError("the smoothness experiment applies to the SYA case only");
    }
    const SyntheticSpec spec = builtin_spec(args.case_name);
    MortalityDataset ds = generate_surface(spec, args.seed);
    FitOptions opts = refit_options(derive_seed(args.seed, "sweep"));
    SweepResult sweep = smoothness_sweep(ds, opts, args.workers, args.seed);
    const fs::path path = dir / "smoothness.csv";
    write_sweep_csv(sweep, path.string());
    outputs.push_back(path.string());
    write_manifest(dir, "experiment", config, "", args.seed, outputs);
    return outputs;
  }

  if (args.name == "recovery") {
    const SyntheticSpec spec = builtin_spec(args.case_name);
    MortalityDataset ds = generate_surface(spec, args.seed);

    GAConfig ga_config;
    ga_config.population = args.pop;
    ga_config.generations = args.gens;
    ga_config.master_seed = args.seed;
    ga_config.workers = args.workers;
    ga_config.search_set = SearchSet::from_code(args.set_code);
    GARecord record = run_ga(ga_config, gp_fitness(ds, ga_config.fit_options));

    RankedKernels ranked = rank_and_dedup(record.slot_results());
    FitOptions tight = refit_options(args.seed);
    ranked = refit_top(ranked, 30, tight, ds, args.workers);

    const fs::path ranked_path = dir / "ranked.csv";
    write_ranked_csv(ranked, ranked_path.string());
    outputs.push_back(ranked_path.string());

    RecoveryVerdict verdict = recovery_report(spec, ranked);
    const fs::path verdict_path = dir / "recovery.json";
    write_recovery_json(verdict, verdict_path.string());
    outputs.push_back(verdict_path.string());

    config["pop"] = args.pop;
    config["gens"] = args.gens;
    config["set"] = args.set_code;
    write_manifest(dir, "experiment", config, "", args.seed, outputs);
    return outputs;
  }

  if (args.name == "convergence") {
    const SyntheticSpec spec = builtin_spec(args.case_name);
    MortalityDataset ds = generate_surface(spec, args.seed);
    const std::vector<double> eps_list = {1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
    auto rows = convergence_profile(spec.expr, ds, eps_list, args.eta_long,
                                    derive_seed(args.seed, "convergence"));
    const fs::path path = dir / "convergence.csv";
    write_convergence_csv(rows, path.string());
    outputs.push_back(path.string());
    config["eta_long"] = args.eta_long;
    write_manifest(dir, "experiment", config, "", args.seed, outputs);
    return outputs;
  }

  throw UsageError("unknown experiment '" + args.name +
                   "' (expected smoothness, recovery or convergence)");
}

}  // namespace mortgp
