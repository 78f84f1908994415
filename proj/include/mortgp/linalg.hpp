#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace mortgp {

// Cholesky factorization with the project's jitter policy: start at
// 1e-8 * mean(diag), escalate x10 up to 1e-4 * mean(diag), then fail with
// NumericalError. `jitter` reports the diagonal shift actually applied.
struct CholResult {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double logdet = 0.0;
  double jitter = 0.0;
};

CholResult chol_with_jitter(const Eigen::MatrixXd& A);

// Draws from MVN(mean, cov); returns an n x n_samples matrix, deterministic
// for a given seed. Uses chol_with_jitter on cov.
Eigen::MatrixXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                           int n_samples, uint64_t seed);

}  // namespace mortgp
