#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "mortgp/dataset.hpp"
#include "mortgp/expr.hpp"
#include "mortgp/gram.hpp"

namespace mortgp {

// Constrained hyperparameter vector in ModelLayout order:
//   [beta0, beta_ag, scales..., leaf params..., sigma2]
using Theta = Eigen::VectorXd;

Theta to_unconstrained(const ModelLayout& layout, const Theta& theta);
Theta from_unconstrained(const ModelLayout& layout, const Eigen::VectorXd& u);
// Elementwise d(theta)/d(u) evaluated at theta, for chain-ruling gradients.
Eigen::VectorXd transform_jacobian(const ModelLayout& layout, const Theta& theta);

// Exact GP marginal log-likelihood machinery bound to one (expr, dataset)
// pair; reusable across optimizer iterations.
class GpProblem {
 public:
  GpProblem(const KernelExpr& expr, const MortalityDataset& data);

  const ModelLayout& layout() const { return layout_; }
  const KernelExpr& expr() const { return expr_; }
  const MortalityDataset& data() const { return data_; }

  // l = -1/2 r' A^-1 r - 1/2 log|A| - n/2 log(2 pi), with
  // r = y - (beta0 + beta_ag * x_age) and A = Gram + noise diagonal.
  // When grad_u is non-null it receives dl/du on the unconstrained scale.
  // Throws FactorizationError when A cannot be factorized even with jitter.
  double mll(const Theta& theta, Eigen::VectorXd* grad_u);

 private:
  KernelExpr expr_;
  const MortalityDataset& data_;
  ModelLayout layout_;
  GramEvaluator eval_;
  Eigen::MatrixXd A_;  // scratch
};

double mll(const KernelExpr& expr, const MortalityDataset& data, const Theta& theta,
           Eigen::VectorXd* grad_u = nullptr);

struct Posterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // latent f, no observation noise
};

// Xstar rows are scaled coordinate triples (training scaling; extrapolation
// beyond [0,1] is allowed).
Posterior posterior(const KernelExpr& expr, const Theta& theta, const MortalityDataset& data,
                    const Eigen::MatrixXd& Xstar);

// One column per sample; mean beta0 + beta_ag * x_age, covariance
// Gram + diag(noise). Deterministic given seed.
Eigen::MatrixXd sample_prior(const KernelExpr& expr, const Theta& theta,
                             const Eigen::MatrixXd& X, const Eigen::VectorXd& noise_diag,
                             int n_samples, uint64_t seed);

Eigen::MatrixXd sample_posterior(const KernelExpr& expr, const Theta& theta,
                                 const MortalityDataset& data, const Eigen::MatrixXd& Xstar,
                                 int n_paths, uint64_t seed);

// Standardized residuals (y - posterior mean) / sqrt(latent var + noise),
// arranged as an (ages x years) grid. Requires a complete grid.
Eigen::MatrixXd residual_grid(const KernelExpr& expr, const Theta& theta,
                              const MortalityDataset& data);

// corr(f(anchor), f(cell)) over an (ages x years) grid under the prior.
Eigen::MatrixXd prior_correlation_slice(const KernelExpr& expr, const Theta& theta,
                                        const ScalingInfo& scaling,
                                        const std::vector<int>& ages,
                                        const std::vector<int>& years, double anchor_age,
                                        double anchor_year);

}  // namespace mortgp
