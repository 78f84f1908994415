#include "mortgp/linalg.hpp"

#include <cmath>
#include <random>

#include "mortgp/errors.hpp"
#include "mortgp/rng.hpp"

namespace mortgp {

CholResult chol_with_jitter(const Eigen::MatrixXd& A) {
  if (!A.allFinite()) {
    throw NumericalError("matrix contains non-finite entries");
  }
  CholResult out;
  out.llt.compute(A);
  double base = A.diagonal().mean();
  if (!(base > 0.0)) base = 1e-30;
  if (out.llt.info() != Eigen::Success) {
    double jitter = 1e-8 * base;
    const double cap = 1e-4 * base;
    Eigen::MatrixXd Aj;
    while (true) {
      Aj = A;
      Aj.diagonal().array() += jitter;
      out.llt.compute(Aj);
      if (out.llt.info() == Eigen::Success) {
        out.jitter = jitter;
        break;
      }
      jitter *= 10.0;
      if (jitter > cap * (1.0 + 1e-12)) {
        throw NumericalError("Cholesky failed after jitter escalation");
      }
    }
  }
  const auto& L = out.llt.matrixLLT();
  for (Eigen::Index i = 0; i < L.rows(); ++i) out.logdet += std::log(L(i, i));
  out.logdet *= 2.0;
  return out;
}

Eigen::MatrixXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                           int n_samples, uint64_t seed) {
  const Eigen::Index n = mean.size();
  CholResult chol = chol_with_jitter(cov);
  Eigen::MatrixXd L = chol.llt.matrixL();
  std::mt19937_64 rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd out(n, n_samples);
  Eigen::VectorXd z(n);
  for (int s = 0; s < n_samples; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) z[i] = gauss(rng);
    out.col(s) = mean + L * z;
  }
  return out;
}

}  // namespace mortgp
