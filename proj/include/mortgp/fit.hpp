#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mortgp/gp.hpp"
#include "mortgp/rng.hpp"

namespace mortgp {

struct FitOptions {
  double learning_rate = 0.05;
  double tolerance = 1e-4;     // epsilon on best-mll improvement
  int max_iterations = 150;
  int convergence_window = 5;  // consecutive sub-tolerance iterations to stop
  uint64_t rng_seed = 0;
  bool record_trace = true;
};

// Tight options used when refitting the ranked top kernels.
FitOptions refit_options(uint64_t seed);

struct FitResult {
  KernelExpr expr;
  ModelLayout layout;
  Theta theta;               // constrained, best-seen
  double mll = 0.0;
  double bic = 0.0;
  int n_iterations = 0;
  bool converged = false;
  bool failed = true;
  std::vector<double> trace;  // raw per-iteration mll
  ScalingInfo scaling;
  NoiseMode noise_mode = NoiseMode::Homoskedastic;
  int n_obs = 0;
  std::string canonical;

  int n_hyperparams() const { return layout.dim(); }
  std::vector<double> scales() const;       // slot order
  std::vector<double> leaf_params() const;  // preorder leaf order
  std::string fitted_string() const;
};

// Random starting point: lengthscale-like params log-uniform on [0.05, 2],
// Mehler rho uniform on (0, 0.9), scales var(y)/n_components, sigma2 sized to
// 1% of var(y), mean coefficients from least squares. Leaf params already
// bound on the expression are kept as given.
Theta init_hyperparams(const KernelExpr& expr, const ModelLayout& layout,
                       const MortalityDataset& data, std::mt19937_64& rng);

// Adaptive-moment gradient ascent on the unconstrained parameters; returns
// best-seen parameters. Never throws on factorization trouble: a fit that
// cannot produce a single likelihood value is returned with failed = true.
FitResult fit(const KernelExpr& expr, const MortalityDataset& data, const FitOptions& opts);

struct ConvergenceRow {
  double epsilon;
  int eta;      // first iteration (1-based) within epsilon of the long-run best
  double bic_at_eta;
};

std::vector<ConvergenceRow> convergence_profile(const KernelExpr& expr,
                                                const MortalityDataset& data,
                                                const std::vector<double>& eps_list,
                                                int eta_long, uint64_t seed,
                                                double learning_rate = 0.05);

struct ParamReport {
  std::string name;
  double value = 0.0;      // internal (scaled-axis) value
  double reported = 0.0;   // back-transformed where meaningful
  bool scaled_axis = false;  // true when the value stays on the transformed scale
};

// Stationary lengthscales multiplied by the coordinate span; the mean age
// slope converted to per-year-of-age units; Min/Lin/Meh parameters flagged as
// remaining on the scaled axis.
std::vector<ParamReport> report_params(const FitResult& fit, const ScalingInfo& scaling);

// Runs tasks 0..n-1 on up to `workers` threads. Task order within a worker is
// unspecified but results must not depend on it (tasks are independent).
void parallel_for(int n_tasks, int workers, const std::function<void(int)>& task);

}  // namespace mortgp
