#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "mortgp/expr.hpp"

namespace mortgp {

// Entrywise recursive Gram evaluation over an expression tree.
//
// Kernel parameter vector layout (the kernel slice of ModelLayout):
//   [scales in slot order..., leaf params in preorder leaf order]
//
// Construction binds the evaluator to (expr, X1, X2); forward() may then be
// called repeatedly with different parameter values, which is the hot path
// during hyperparameter optimization. Because inputs live on a grid, each
// base kernel takes few distinct values; leaves are evaluated on unique
// coordinate-value pairs and scattered into the full matrix.
class GramEvaluator {
 public:
  GramEvaluator(const KernelExpr& expr, const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2);

  int n_kernel_params() const { return n_scales_ + n_leaf_params_; }

  // Kernel matrix including scale coefficients. kp must have n_kernel_params.
  const Eigen::MatrixXd& forward(const double* kp);

  // Reverse sweep after forward(): g_j = sum(W .* dK/dtheta_j) for every
  // kernel parameter (constrained parameterization).
  Eigen::VectorXd backward(const Eigen::MatrixXd& W);

  // Explicit per-parameter gradient matrices dK/dtheta_j (after forward()).
  std::vector<Eigen::MatrixXd> gradient_matrices();

 private:
  struct Node {
    const KernelExpr* src = nullptr;
    bool leaf = false;
    bool add = false;
    int left = -1, right = -1;
    int applied_slot = -1;       // scale slot multiplying this node's value
    int leaf_param_offset = -1;  // into the leaf-params segment
    Family family = Family::M12;
    int coord = 0;
    int n_params = 0;
    Eigen::MatrixXd V;
    Eigen::MatrixXd adj;
  };

  struct CoordCache {
    std::vector<double> u1, u2;
    std::vector<int32_t> idx1, idx2;
  };

  int build_nodes(const KernelExpr& e);
  void build_coord_cache(const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2);
  void eval_leaf(Node& node);
  void leaf_param_grads(const Node& node, const Eigen::MatrixXd& weight, double* g) const;
  void leaf_gradient_matrices(const Node& node, const Eigen::MatrixXd& path,
                              std::vector<Eigen::MatrixXd>& out) const;

  std::array<CoordCache, 3> coords_;
  std::vector<Node> nodes_;
  int n_scales_ = 0;
  int n_leaf_params_ = 0;
  int n1_ = 0, n2_ = 0;
  Eigen::MatrixXd K_;
  std::vector<double> kp_;
};

// One-shot convenience wrappers.
Eigen::MatrixXd gram(const KernelExpr& expr, std::span<const double> kernel_params,
                     const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2);

struct GramWithGradients {
  Eigen::MatrixXd K;
  std::vector<Eigen::MatrixXd> dK;
};

GramWithGradients gram_with_gradients(const KernelExpr& expr,
                                      std::span<const double> kernel_params,
                                      const Eigen::MatrixXd& X);

}  // namespace mortgp
