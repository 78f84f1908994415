#include "mortgp/fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "mortgp/errors.hpp"
#include "mortgp/scoring.hpp"

namespace mortgp {

FitOptions refit_options(uint64_t seed) {
  FitOptions opts;
  opts.tolerance = 1e-6;
  opts.max_iterations = 1000;
  opts.rng_seed = seed;
  return opts;
}

std::vector<double> FitResult::scales() const {
  return std::vector<double>(theta.data() + 2, theta.data() + 2 + layout.n_scales);
}

std::vector<double> FitResult::leaf_params() const {
  const int off = 2 + layout.n_scales;
  return std::vector<double>(theta.data() + off, theta.data() + off + layout.n_leaf_params);
}

std::string FitResult::fitted_string() const {
  const auto s = scales();
  const auto lp = leaf_params();
  return format_fitted(expr, s, lp);
}

Theta init_hyperparams(const KernelExpr& expr, const ModelLayout& layout,
                       const MortalityDataset& data, std::mt19937_64& rng) {
  const int n = data.n();
  const double mean_y = data.y.mean();
  double var_y = (data.y.array() - mean_y).square().sum() / std::max(n - 1, 1);
  if (!(var_y > 0.0)) var_y = 0.0;

  Theta theta(layout.dim());
  theta[0] = mean_y;

  // least-squares slope of y on scaled age
  const Eigen::ArrayXd xa = data.X.col(0).array();
  const double mx = xa.mean();
  const double sxx = (xa - mx).square().sum();
  theta[1] = sxx > 0.0 ? ((xa - mx) * (data.y.array() - mean_y)).sum() / sxx : 0.0;

  const ExprStats st = expr_stats(expr);
  const double scale_init = std::max(var_y / st.n_additive_components, 1e-6);
  for (int s = 0; s < layout.n_scales; ++s) theta[2 + s] = scale_init;

  std::uniform_real_distribution<double> log_len(std::log(0.05), std::log(2.0));
  std::uniform_real_distribution<double> rho_dist(0.0, 0.9);
  const auto leaves = leaves_preorder(expr);
  int idx = 2 + layout.n_scales;
  for (const KernelExpr* leaf : leaves) {
    const BaseKernel& k = leaf->leaf();
    const int np = family_param_count(k.family);
    const bool bound = static_cast<int>(k.params.size()) == np;
    for (int pi = 0; pi < np; ++pi) {
      double draw;
      if (k.family == Family::Meh) {
        draw = std::max(rho_dist(rng), 1e-6);
      } else {
        draw = std::exp(log_len(rng));
      }
      theta[idx++] = bound ? k.params[pi] : draw;
    }
  }

  double sigma2 = 0.01 * var_y;
  if (data.noise_mode == NoiseMode::ByDeaths && data.deaths.size() == n) {
    std::vector<double> d(data.deaths.data(), data.deaths.data() + n);
    std::nth_element(d.begin(), d.begin() + n / 2, d.end());
    sigma2 = 0.01 * var_y * d[n / 2];
  }
  theta[layout.sigma2_index()] = std::max(sigma2, 1e-8);
  return theta;
}

namespace {

// keep exp/tanh transforms well away from overflow
void clamp_unconstrained(const ModelLayout& layout, Eigen::VectorXd& u) {
  for (int i = 0; i < u.size(); ++i) {
    if (layout.transforms[i] != Transform::Identity) {
      u[i] = std::clamp(u[i], -30.0, 30.0);
    }
  }
}

}  // namespace

FitResult fit(const KernelExpr& expr, const MortalityDataset& data, const FitOptions& opts) {
  if (opts.max_iterations < 1) throw UsageError("max iterations must be at least 1");
  if (!(opts.tolerance >= 0.0)) throw UsageError("tolerance must be nonnegative");
  GpProblem problem(expr, data);
  const ModelLayout& layout = problem.layout();

  FitResult result;
  result.expr = expr;
  result.layout = layout;
  result.scaling = data.scaling;
  result.noise_mode = data.noise_mode;
  result.n_obs = data.n();
  result.canonical = canonical_form(expr);

  std::mt19937_64 rng = make_rng(opts.rng_seed);
  Theta theta0 = init_hyperparams(expr, layout, data, rng);
  Eigen::VectorXd u = to_unconstrained(layout, theta0);
  clamp_unconstrained(layout, u);

  const int dim = layout.dim();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_u = u;
  int streak = 0;
  Eigen::VectorXd grad(dim);
  Eigen::VectorXd prev_u = u;
  Eigen::VectorXd last_step = Eigen::VectorXd::Zero(dim);
  bool have_good_point = false;

  int t = 0;
  while (t < opts.max_iterations) {
    ++t;
    Theta theta = from_unconstrained(layout, u);
    double value;
    bool ok = false;
    try {
      value = problem.mll(theta, &grad);
      ok = std::isfinite(value);
    } catch (const FactorizationError&) {
      ok = false;
    }
    if (!ok) {
      if (!have_good_point) {
        result.failed = true;
        result.bic = std::numeric_limits<double>::infinity();
        result.n_iterations = t;
        return result;
      }
      // shrink the offending step 10x at a time and retry from the last good point
      bool recovered = false;
      Eigen::VectorXd step = last_step;
      for (int attempt = 0; attempt < 8; ++attempt) {
        step *= 0.1;
        u = prev_u + step;
        theta = from_unconstrained(layout, u);
        try {
          value = problem.mll(theta, &grad);
          if (std::isfinite(value)) {
            recovered = true;
            last_step = step;
            break;
          }
        } catch (const FactorizationError&) {
        }
      }
      if (!recovered) {
        u = prev_u;
        break;  // keep the best point found so far
      }
    }
    have_good_point = true;
    if (opts.record_trace) result.trace.push_back(value);

    const double prev_best = best;
    if (value > best) {
      best = value;
      best_u = u;
    }
    const double improvement = best - prev_best;
    if (improvement < opts.tolerance) {
      ++streak;
    } else {
      streak = 0;
    }
    if (streak >= opts.convergence_window) {
      result.converged = true;
      break;
    }

    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    Eigen::VectorXd step =
        (opts.learning_rate / bc1) * m.cwiseQuotient(((v / bc2).cwiseSqrt().array() + adam_eps).matrix());
    prev_u = u;
    last_step = step;
    u += step;
    clamp_unconstrained(layout, u);
  }

  result.n_iterations = t;
  if (!std::isfinite(best)) {
    result.failed = true;
    result.bic = std::numeric_limits<double>::infinity();
    return result;
  }
  result.failed = false;
  result.theta = from_unconstrained(layout, best_u);
  result.mll = best;
  result.bic = bic(best, layout.dim(), data.n());
  return result;
}

std::vector<ConvergenceRow> convergence_profile(const KernelExpr& expr,
                                                const MortalityDataset& data,
                                                const std::vector<double>& eps_list,
                                                int eta_long, uint64_t seed,
                                                double learning_rate) {
  FitOptions opts;
  opts.learning_rate = learning_rate;
  opts.tolerance = 0.0;  // disable early stopping
  opts.max_iterations = eta_long;
  opts.rng_seed = seed;
  FitResult fr = fit(expr, data, opts);
  if (fr.failed || fr.trace.empty()) {
    throw NumericalError("convergence profile: long fit failed");
  }
  const double l_best = *std::max_element(fr.trace.begin(), fr.trace.end());
  std::vector<ConvergenceRow> rows;
  for (double eps : eps_list) {
    int eta = static_cast<int>(fr.trace.size());
    for (size_t i = 0; i < fr.trace.size(); ++i) {
      if (l_best - fr.trace[i] <= eps) {
        eta = static_cast<int>(i) + 1;
        break;
      }
    }
    rows.push_back({eps, eta, bic(fr.trace[eta - 1], fr.layout.dim(), data.n())});
  }
  return rows;
}

std::vector<ParamReport> report_params(const FitResult& fit, const ScalingInfo& scaling) {
  std::vector<ParamReport> out;
  const ModelLayout& layout = fit.layout;
  for (int i = 0; i < layout.dim(); ++i) {
    ParamReport row;
    row.name = layout.names[i];
    row.value = fit.theta[i];
    row.reported = fit.theta[i];
    if (i == 1) {
      row.reported = fit.theta[i] / scaling.span(Coordinate::Age);  // per year of age
    } else if (i >= layout.kernel_offset() && i < layout.sigma2_index()) {
      const auto& info = layout.kernel_info[i - layout.kernel_offset()];
      if (!info.is_scale) {
        if (family_param_is_lengthscale_like(info.family, info.param_index)) {
          row.reported = fit.theta[i] * scaling.span(info.coord);
        } else {
          row.scaled_axis = true;  // Min t0, Lin sigma0, Meh rho stay transformed
        }
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

void parallel_for(int n_tasks, int workers, const std::function<void(int)>& task) {
  workers = std::max(1, std::min(workers, n_tasks));
  if (workers == 1) {
    for (int i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        while (true) {
          const int i = next.fetch_add(1);
          if (i >= n_tasks) break;
          task(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace mortgp
