#pragma once

// Test-only helpers: an independent naive evaluator for compositional kernel
// covariances (used as the oracle against the production Gram/mll path) and
// small random-instance generators.

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "mortgp/expr.hpp"
#include "mortgp/ga.hpp"

namespace testsupport {

using mortgp::BaseKernel;
using mortgp::Coordinate;
using mortgp::Family;
using mortgp::KernelExpr;

// Closed forms written straight from the kernel table, independently of the
// production implementation.
inline double naive_base_cov(Family f, const double* p, double u, double v) {
  const double r = std::fabs(u - v);
  switch (f) {
    case Family::M12: return std::exp(-r / p[0]);
    case Family::M32: {
      const double a = std::sqrt(3.0) / p[0];
      return (1.0 + a * r) * std::exp(-a * r);
    }
    case Family::M52: {
      const double a = std::sqrt(5.0) / p[0];
      return (1.0 + a * r + 5.0 * r * r / (3.0 * p[0] * p[0])) * std::exp(-a * r);
    }
    case Family::Chy: return 1.0 / (1.0 + r * r / (p[0] * p[0]));
    case Family::RBF: return std::exp(-r * r / (2.0 * p[0] * p[0]));
    case Family::AR2: {
      const double alpha = 1.0 / p[0];
      const double omega = M_PI / p[1];
      return std::exp(-alpha * r) * (std::cos(omega * r) + alpha / omega * std::sin(omega * r));
    }
    case Family::Lin: return p[0] * p[0] + u * v;
    case Family::Min: return p[0] * p[0] + (u < v ? u : v);
    case Family::Meh: {
      const double rho = p[0];
      return std::exp(-(rho * rho * (u * u + v * v) - 2.0 * rho * u * v) /
                      (2.0 * (1.0 - rho * rho)));
    }
  }
  return 0.0;
}

// Naive recursive expression covariance between two points, consuming scales
// (slot order) and leaf params (preorder) through cursors.
struct NaiveEval {
  const std::vector<double>& scales;
  const std::vector<double>& leaf_params;

  size_t scale_cursor = 0;
  size_t leaf_cursor = 0;

  double value(const KernelExpr& e, const Eigen::RowVector3d& x1, const Eigen::RowVector3d& x2) {
    scale_cursor = 0;
    leaf_cursor = 0;
    double v = node_value(e, x1, x2);
    if (e.kind() != KernelExpr::Kind::Add) v *= scales[scale_cursor++];
    return v;
  }

  double node_value(const KernelExpr& e, const Eigen::RowVector3d& x1,
                    const Eigen::RowVector3d& x2) {
    if (e.is_leaf()) {
      const BaseKernel& k = e.leaf();
      const int c = static_cast<int>(k.coord);
      const double out =
          naive_base_cov(k.family, leaf_params.data() + leaf_cursor, x1[c], x2[c]);
      leaf_cursor += mortgp::family_param_count(k.family);
      return out;
    }
    if (e.kind() == KernelExpr::Kind::Add) {
      // slot order: left slot, left subtree, right slot, right subtree
      const double sl = scales[scale_cursor++];
      const double vl = node_value(e.left(), x1, x2);
      const double sr = scales[scale_cursor++];
      const double vr = node_value(e.right(), x1, x2);
      return sl * vl + sr * vr;
    }
    const double vl = node_value(e.left(), x1, x2);
    const double vr = node_value(e.right(), x1, x2);
    return vl * vr;
  }
};

inline Eigen::MatrixXd naive_gram(const KernelExpr& expr, const std::vector<double>& scales,
                                  const std::vector<double>& leaf_params,
                                  const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2) {
  NaiveEval eval{scales, leaf_params};
  Eigen::MatrixXd K(X1.rows(), X2.rows());
  for (Eigen::Index i = 0; i < X1.rows(); ++i) {
    for (Eigen::Index j = 0; j < X2.rows(); ++j) {
      K(i, j) = eval.value(expr, X1.row(i), X2.row(j));
    }
  }
  return K;
}

// Dense log-density of y under MVN(mean, cov) via LU, no Cholesky involved.
inline double naive_mvn_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& cov) {
  const Eigen::Index n = y.size();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
  const Eigen::VectorXd r = y - mean;
  const double quad = r.dot(lu.solve(r));
  const double logdet = std::log(std::fabs(lu.determinant()));
  return -0.5 * quad - 0.5 * logdet - 0.5 * n * std::log(2.0 * M_PI);
}

inline KernelExpr random_tree(std::mt19937_64& rng, int max_length = 9) {
  std::vector<int> lengths;
  for (int len = 1; len <= max_length; len += 2) lengths.push_back(len);
  return mortgp::initialize_kernel(rng, mortgp::SearchSet::full(), lengths, 0.5);
}

// Random in-domain constrained parameters for an expression.
inline void random_params(const KernelExpr& expr, std::mt19937_64& rng,
                          std::vector<double>& scales, std::vector<double>& leaf_params) {
  std::uniform_real_distribution<double> log_scale(std::log(0.05), std::log(3.0));
  std::uniform_real_distribution<double> log_len(std::log(0.08), std::log(2.0));
  std::uniform_real_distribution<double> rho(-0.85, 0.85);
  scales.clear();
  leaf_params.clear();
  for (int s = 0; s < mortgp::scale_slot_count(expr); ++s) {
    scales.push_back(std::exp(log_scale(rng)));
  }
  for (const KernelExpr* leaf : mortgp::leaves_preorder(expr)) {
    if (leaf->leaf().family == Family::Meh) {
      double v = rho(rng);
      if (std::fabs(v) < 1e-3) v = 0.1;
      leaf_params.push_back(v);
    } else {
      for (int i = 0; i < mortgp::family_param_count(leaf->leaf().family); ++i) {
        leaf_params.push_back(std::exp(log_len(rng)));
      }
    }
  }
}

// Random scaled coordinate matrix: age, year uniform in [0,1], cohort as a
// consistent affine blend the way real grids produce it.
inline Eigen::MatrixXd random_inputs(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd X(n, 3);
  for (int i = 0; i < n; ++i) {
    const double a = unif(rng), y = unif(rng);
    X(i, 0) = a;
    X(i, 1) = y;
    X(i, 2) = 0.5 * (y - a) + 0.5;
  }
  return X;
}

}  // namespace testsupport
