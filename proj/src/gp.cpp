#include "mortgp/gp.hpp"

#include <cmath>

#include "mortgp/errors.hpp"
#include "mortgp/linalg.hpp"

namespace mortgp {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

Theta to_unconstrained(const ModelLayout& layout, const Theta& theta) {
  Eigen::VectorXd u(theta.size());
  for (int i = 0; i < theta.size(); ++i) {
    switch (layout.transforms[i]) {
      case Transform::Identity: u[i] = theta[i]; break;
      case Transform::Log: u[i] = std::log(theta[i]); break;
      case Transform::Atanh: u[i] = std::atanh(theta[i]); break;
    }
  }
  return u;
}

Theta from_unconstrained(const ModelLayout& layout, const Eigen::VectorXd& u) {
  Theta theta(u.size());
  for (int i = 0; i < u.size(); ++i) {
    switch (layout.transforms[i]) {
      case Transform::Identity: theta[i] = u[i]; break;
      case Transform::Log: theta[i] = std::exp(u[i]); break;
      case Transform::Atanh: theta[i] = std::tanh(u[i]); break;
    }
  }
  return theta;
}

Eigen::VectorXd transform_jacobian(const ModelLayout& layout, const Theta& theta) {
  Eigen::VectorXd j(theta.size());
  for (int i = 0; i < theta.size(); ++i) {
    switch (layout.transforms[i]) {
      case Transform::Identity: j[i] = 1.0; break;
      case Transform::Log: j[i] = theta[i]; break;
      case Transform::Atanh: j[i] = 1.0 - theta[i] * theta[i]; break;
    }
  }
  return j;
}

GpProblem::GpProblem(const KernelExpr& expr, const MortalityDataset& data)
    : expr_(expr), data_(data), layout_(ModelLayout::of(expr)), eval_(expr_, data.X, data.X) {}

double GpProblem::mll(const Theta& theta, Eigen::VectorXd* grad_u) {
  const int n = data_.n();
  if (theta.size() != layout_.dim()) {
    throw std::invalid_argument("hyperparameter vector does not match expression layout");
  }
  const double beta0 = theta[0];
  const double beta_ag = theta[1];
  const double sigma2 = theta[layout_.sigma2_index()];
  const double* kp = theta.data() + layout_.kernel_offset();

  Eigen::VectorXd noise = noise_diagonal(data_, sigma2);

  const Eigen::MatrixXd& K = eval_.forward(kp);
  A_ = K;
  A_.diagonal() += noise;

  CholResult chol;
  try {
    chol = chol_with_jitter(A_);
  } catch (const NumericalError& e) {
    throw FactorizationError(e.what(),
                             std::vector<double>(theta.data(), theta.data() + theta.size()));
  }

  Eigen::VectorXd r = data_.y.array() - beta0 - beta_ag * data_.X.col(0).array();
  Eigen::VectorXd alpha = chol.llt.solve(r);
  const double value = -0.5 * r.dot(alpha) - 0.5 * chol.logdet - 0.5 * n * kLog2Pi;

  if (grad_u) {
    Eigen::MatrixXd Ainv = chol.llt.solve(Eigen::MatrixXd::Identity(n, n));
    Eigen::MatrixXd B = alpha * alpha.transpose() - Ainv;

    Eigen::VectorXd g = Eigen::VectorXd::Zero(layout_.dim());
    g[0] = alpha.sum();
    g[1] = alpha.dot(data_.X.col(0));
    g.segment(layout_.kernel_offset(), layout_.n_kernel()) = eval_.backward(0.5 * B);
    if (data_.noise_mode == NoiseMode::Homoskedastic) {
      g[layout_.sigma2_index()] = 0.5 * B.trace();
    } else {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += B(i, i) / data_.deaths[i];
      g[layout_.sigma2_index()] = 0.5 * acc;
    }
    *grad_u = g.cwiseProduct(transform_jacobian(layout_, theta));
  }
  return value;
}

double mll(const KernelExpr& expr, const MortalityDataset& data, const Theta& theta,
           Eigen::VectorXd* grad_u) {
  GpProblem problem(expr, data);
  return problem.mll(theta, grad_u);
}

Posterior posterior(const KernelExpr& expr, const Theta& theta, const MortalityDataset& data,
                    const Eigen::MatrixXd& Xstar) {
  const ModelLayout layout = ModelLayout::of(expr);
  if (theta.size() != layout.dim()) {
    throw std::invalid_argument("hyperparameter vector does not match expression layout");
  }
  const double beta0 = theta[0];
  const double beta_ag = theta[1];
  const double sigma2 = theta[layout.sigma2_index()];
  std::span<const double> kp(theta.data() + layout.kernel_offset(),
                             static_cast<size_t>(layout.n_kernel()));

  Eigen::MatrixXd A = gram(expr, kp, data.X, data.X);
  A.diagonal() += noise_diagonal(data, sigma2);
  CholResult chol = chol_with_jitter(A);

  Eigen::VectorXd r = data.y.array() - beta0 - beta_ag * data.X.col(0).array();
  Eigen::VectorXd alpha = chol.llt.solve(r);

  Eigen::MatrixXd Ks = gram(expr, kp, data.X, Xstar);    // n x m
  Eigen::MatrixXd Kss = gram(expr, kp, Xstar, Xstar);    // m x m

  Posterior post;
  post.mean = (beta0 + beta_ag * Xstar.col(0).array()).matrix() + Ks.transpose() * alpha;
  post.cov = Kss - Ks.transpose() * chol.llt.solve(Ks);
  return post;
}

Eigen::MatrixXd sample_prior(const KernelExpr& expr, const Theta& theta,
                             const Eigen::MatrixXd& X, const Eigen::VectorXd& noise_diag,
                             int n_samples, uint64_t seed) {
  const ModelLayout layout = ModelLayout::of(expr);
  std::span<const double> kp(theta.data() + layout.kernel_offset(),
                             static_cast<size_t>(layout.n_kernel()));
  Eigen::MatrixXd cov = gram(expr, kp, X, X);
  cov.diagonal() += noise_diag;
  Eigen::VectorXd mean = (theta[0] + theta[1] * X.col(0).array()).matrix();
  return sample_mvn(mean, cov, n_samples, seed);
}

Eigen::MatrixXd sample_posterior(const KernelExpr& expr, const Theta& theta,
                                 const MortalityDataset& data, const Eigen::MatrixXd& Xstar,
                                 int n_paths, uint64_t seed) {
  Posterior post = posterior(expr, theta, data, Xstar);
  return sample_mvn(post.mean, post.cov, n_paths, seed);
}

Eigen::MatrixXd residual_grid(const KernelExpr& expr, const Theta& theta,
                              const MortalityDataset& data) {
  if (!data.full_grid) throw DataError("residual grid requires a complete age x year grid");
  const ModelLayout layout = ModelLayout::of(expr);
  const double sigma2 = theta[layout.sigma2_index()];

  Posterior post = posterior(expr, theta, data, data.X);
  Eigen::VectorXd noise = noise_diagonal(data, sigma2);

  const int n_ages = static_cast<int>(data.unique_ages.size());
  const int n_years = static_cast<int>(data.unique_years.size());
  Eigen::MatrixXd grid(n_ages, n_years);
  // rows are sorted by (age, year), so index i = ia * n_years + iy
  for (int ia = 0; ia < n_ages; ++ia) {
    for (int iy = 0; iy < n_years; ++iy) {
      const int i = ia * n_years + iy;
      const double var = std::max(post.cov(i, i), 0.0);
      grid(ia, iy) = (data.y[i] - post.mean[i]) / std::sqrt(var + noise[i]);
    }
  }
  return grid;
}

Eigen::MatrixXd prior_correlation_slice(const KernelExpr& expr, const Theta& theta,
                                        const ScalingInfo& scaling,
                                        const std::vector<int>& ages,
                                        const std::vector<int>& years, double anchor_age,
                                        double anchor_year) {
  const ModelLayout layout = ModelLayout::of(expr);
  std::span<const double> kp(theta.data() + layout.kernel_offset(),
                             static_cast<size_t>(layout.n_kernel()));

  const int n_ages = static_cast<int>(ages.size());
  const int n_years = static_cast<int>(years.size());
  Eigen::MatrixXd Xg(n_ages * n_years, 3);
  for (int ia = 0; ia < n_ages; ++ia) {
    for (int iy = 0; iy < n_years; ++iy) {
      Xg.row(ia * n_years + iy) = scale_point(scaling, ages[ia], years[iy]);
    }
  }
  Eigen::MatrixXd Xa(1, 3);
  Xa.row(0) = scale_point(scaling, anchor_age, anchor_year);

  Eigen::MatrixXd kag = gram(expr, kp, Xa, Xg);  // 1 x m
  const double kaa = gram(expr, kp, Xa, Xa)(0, 0);
  Eigen::VectorXd diag = gram(expr, kp, Xg, Xg).diagonal();

  if (!(kaa > 0.0)) throw NumericalError("zero prior variance at the anchor cell");
  Eigen::MatrixXd grid(n_ages, n_years);
  for (int ia = 0; ia < n_ages; ++ia) {
    for (int iy = 0; iy < n_years; ++iy) {
      const int i = ia * n_years + iy;
      if (!(diag[i] > 0.0)) throw NumericalError("zero prior variance at a grid cell");
      grid(ia, iy) = kag(0, i) / std::sqrt(kaa * diag[i]);
    }
  }
  return grid;
}

}  // namespace mortgp
