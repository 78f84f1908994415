#include "mortgp/gram.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "mortgp/errors.hpp"

namespace mortgp {

namespace {

void unique_index(const Eigen::MatrixXd& X, int col, std::vector<double>& uniq,
                  std::vector<int32_t>& idx) {
  const Eigen::Index n = X.rows();
  uniq.assign(X.col(col).data(), X.col(col).data() + n);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  idx.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    idx[i] = static_cast<int32_t>(
        std::lower_bound(uniq.begin(), uniq.end(), X(i, col)) - uniq.begin());
  }
}

}  // namespace

GramEvaluator::GramEvaluator(const KernelExpr& expr, const Eigen::MatrixXd& X1,
                             const Eigen::MatrixXd& X2) {
  if (X1.cols() != 3 || X2.cols() != 3) {
    throw std::invalid_argument("gram inputs must be n x 3 scaled coordinate matrices");
  }
  n1_ = static_cast<int>(X1.rows());
  n2_ = static_cast<int>(X2.rows());
  build_coord_cache(X1, X2);

  nodes_.reserve(expr.length());
  build_nodes(expr);

  // Attach scale slots per the shared enumeration.
  const auto slots = enumerate_scale_slots(expr);
  n_scales_ = static_cast<int>(slots.size());
  std::map<const KernelExpr*, int> slot_of;
  for (size_t s = 0; s < slots.size(); ++s) slot_of[slots[s]] = static_cast<int>(s);
  for (auto& node : nodes_) {
    auto it = slot_of.find(node.src);
    if (it != slot_of.end()) node.applied_slot = it->second;
  }

  // Leaf parameter offsets in preorder leaf order, shifted past the scales.
  int offset = n_scales_;
  for (auto& node : nodes_) {
    if (!node.leaf) continue;
    node.leaf_param_offset = offset;
    offset += node.n_params;
    n_leaf_params_ += node.n_params;
  }
}

int GramEvaluator::build_nodes(const KernelExpr& e) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  nodes_[id].src = &e;
  if (e.is_leaf()) {
    validate_base_kernel(e.leaf());
    nodes_[id].leaf = true;
    nodes_[id].family = e.leaf().family;
    nodes_[id].coord = static_cast<int>(e.leaf().coord);
    nodes_[id].n_params = family_param_count(e.leaf().family);
    return id;
  }
  nodes_[id].add = e.kind() == KernelExpr::Kind::Add;
  const int l = build_nodes(e.left());
  const int r = build_nodes(e.right());
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

void GramEvaluator::build_coord_cache(const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2) {
  for (int c = 0; c < 3; ++c) {
    unique_index(X1, c, coords_[c].u1, coords_[c].idx1);
    unique_index(X2, c, coords_[c].u2, coords_[c].idx2);
  }
}

void GramEvaluator::eval_leaf(Node& node) {
  const CoordCache& cc = coords_[node.coord];
  const int m1 = static_cast<int>(cc.u1.size());
  const int m2 = static_cast<int>(cc.u2.size());
  const double* p = kp_.data() + node.leaf_param_offset;

  Eigen::MatrixXd table(m1, m2);
  for (int b = 0; b < m2; ++b) {
    for (int a = 0; a < m1; ++a) {
      table(a, b) = base_cov_value(node.family, p, cc.u1[a], cc.u2[b]);
    }
  }
  node.V.resize(n1_, n2_);
  for (int j = 0; j < n2_; ++j) {
    const int32_t bj = cc.idx2[j];
    for (int i = 0; i < n1_; ++i) {
      node.V(i, j) = table(cc.idx1[i], bj);
    }
  }
}

const Eigen::MatrixXd& GramEvaluator::forward(const double* kp) {
  kp_.assign(kp, kp + n_kernel_params());
  // children carry larger preorder indices, so a reverse sweep is bottom-up
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    Node& node = nodes_[i];
    if (node.leaf) {
      eval_leaf(node);
      continue;
    }
    const Node& L = nodes_[node.left];
    const Node& R = nodes_[node.right];
    if (node.add) {
      const double sl = kp_[L.applied_slot];
      const double sr = kp_[R.applied_slot];
      node.V = sl * L.V + sr * R.V;
    } else {
      node.V = L.V.cwiseProduct(R.V);
    }
  }
  const Node& root = nodes_[0];
  if (root.applied_slot >= 0) {
    K_ = kp_[root.applied_slot] * root.V;
  } else {
    K_ = root.V;
  }
  return K_;
}

void GramEvaluator::leaf_param_grads(const Node& node, const Eigen::MatrixXd& weight,
                                     double* g) const {
  const CoordCache& cc = coords_[node.coord];
  const int m1 = static_cast<int>(cc.u1.size());
  const int m2 = static_cast<int>(cc.u2.size());

  // Pool the weight matrix over unique coordinate-value classes first, then
  // contract with the analytic per-pair partials.
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(m1, m2);
  for (int j = 0; j < n2_; ++j) {
    const int32_t bj = cc.idx2[j];
    for (int i = 0; i < n1_; ++i) {
      pooled(cc.idx1[i], bj) += weight(i, j);
    }
  }
  const double* p = kp_.data() + node.leaf_param_offset;
  double buf[3];
  double acc[2] = {0.0, 0.0};
  for (int b = 0; b < m2; ++b) {
    for (int a = 0; a < m1; ++a) {
      base_cov_value_grad(node.family, p, cc.u1[a], cc.u2[b], buf);
      acc[0] += pooled(a, b) * buf[1];
      if (node.n_params > 1) acc[1] += pooled(a, b) * buf[2];
    }
  }
  g[node.leaf_param_offset] += acc[0];
  if (node.n_params > 1) g[node.leaf_param_offset + 1] += acc[1];
}

Eigen::VectorXd GramEvaluator::backward(const Eigen::MatrixXd& W) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_kernel_params());
  Node& root = nodes_[0];
  if (root.applied_slot >= 0) {
    g[root.applied_slot] += W.cwiseProduct(root.V).sum();
    root.adj = kp_[root.applied_slot] * W;
  } else {
    root.adj = W;
  }
  for (size_t i = 0; i < nodes_.size(); ++i) {
    Node& node = nodes_[i];
    if (node.leaf) {
      leaf_param_grads(node, node.adj, g.data());
      continue;
    }
    Node& L = nodes_[node.left];
    Node& R = nodes_[node.right];
    if (node.add) {
      g[L.applied_slot] += node.adj.cwiseProduct(L.V).sum();
      g[R.applied_slot] += node.adj.cwiseProduct(R.V).sum();
      L.adj = kp_[L.applied_slot] * node.adj;
      R.adj = kp_[R.applied_slot] * node.adj;
    } else {
      L.adj = node.adj.cwiseProduct(R.V);
      R.adj = node.adj.cwiseProduct(L.V);
    }
  }
  return g;
}

void GramEvaluator::leaf_gradient_matrices(const Node& node, const Eigen::MatrixXd& path,
                                           std::vector<Eigen::MatrixXd>& out) const {
  const CoordCache& cc = coords_[node.coord];
  const int m1 = static_cast<int>(cc.u1.size());
  const int m2 = static_cast<int>(cc.u2.size());
  const double* p = kp_.data() + node.leaf_param_offset;
  double buf[3];
  std::vector<Eigen::MatrixXd> tables(node.n_params, Eigen::MatrixXd(m1, m2));
  for (int b = 0; b < m2; ++b) {
    for (int a = 0; a < m1; ++a) {
      base_cov_value_grad(node.family, p, cc.u1[a], cc.u2[b], buf);
      tables[0](a, b) = buf[1];
      if (node.n_params > 1) tables[1](a, b) = buf[2];
    }
  }
  for (int q = 0; q < node.n_params; ++q) {
    Eigen::MatrixXd D(n1_, n2_);
    for (int j = 0; j < n2_; ++j) {
      const int32_t bj = cc.idx2[j];
      for (int i = 0; i < n1_; ++i) D(i, j) = tables[q](cc.idx1[i], bj);
    }
    out[node.leaf_param_offset + q] = path.cwiseProduct(D);
  }
}

std::vector<Eigen::MatrixXd> GramEvaluator::gradient_matrices() {
  std::vector<Eigen::MatrixXd> out(n_kernel_params());
  Node& root = nodes_[0];
  if (root.applied_slot >= 0) {
    out[root.applied_slot] = root.V;
    root.adj = Eigen::MatrixXd::Constant(n1_, n2_, kp_[root.applied_slot]);
  } else {
    root.adj = Eigen::MatrixXd::Ones(n1_, n2_);
  }
  for (size_t i = 0; i < nodes_.size(); ++i) {
    Node& node = nodes_[i];
    if (node.leaf) {
      leaf_gradient_matrices(node, node.adj, out);
      continue;
    }
    Node& L = nodes_[node.left];
    Node& R = nodes_[node.right];
    if (node.add) {
      out[L.applied_slot] = node.adj.cwiseProduct(L.V);
      out[R.applied_slot] = node.adj.cwiseProduct(R.V);
      L.adj = kp_[L.applied_slot] * node.adj;
      R.adj = kp_[R.applied_slot] * node.adj;
    } else {
      L.adj = node.adj.cwiseProduct(R.V);
      R.adj = node.adj.cwiseProduct(L.V);
    }
  }
  return out;
}

Eigen::MatrixXd gram(const KernelExpr& expr, std::span<const double> kernel_params,
                     const Eigen::MatrixXd& X1, const Eigen::MatrixXd& X2) {
  GramEvaluator ev(expr, X1, X2);
  if (static_cast<int>(kernel_params.size()) != ev.n_kernel_params()) {
    throw std::invalid_argument("kernel parameter slice does not match expression layout");
  }
  return ev.forward(kernel_params.data());
}

GramWithGradients gram_with_gradients(const KernelExpr& expr,
                                      std::span<const double> kernel_params,
                                      const Eigen::MatrixXd& X) {
  GramEvaluator ev(expr, X, X);
  if (static_cast<int>(kernel_params.size()) != ev.n_kernel_params()) {
    throw std::invalid_argument("kernel parameter slice does not match expression layout");
  }
  GramWithGradients out;
  out.K = ev.forward(kernel_params.data());
  out.dK = ev.gradient_matrices();
  return out;
}

}  // namespace mortgp
