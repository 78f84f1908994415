#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mortgp/kernels.hpp"

namespace mortgp {

// Binary expression tree over base kernels; the unit of GA evolution.
// Value semantics with deep copies; trees are immutable once shared.
class KernelExpr {
 public:
  enum class Kind : uint8_t { Leaf, Add, Mul };

  KernelExpr() : kind_(Kind::Leaf) {}
  explicit KernelExpr(BaseKernel leaf) : kind_(Kind::Leaf), leaf_(std::move(leaf)) {}
  KernelExpr(Kind op, KernelExpr left, KernelExpr right);

  KernelExpr(const KernelExpr& other);
  KernelExpr& operator=(const KernelExpr& other);
  KernelExpr(KernelExpr&&) noexcept = default;
  KernelExpr& operator=(KernelExpr&&) noexcept = default;

  Kind kind() const { return kind_; }
  bool is_leaf() const { return kind_ == Kind::Leaf; }
  const BaseKernel& leaf() const { return leaf_; }
  BaseKernel& leaf() { return leaf_; }
  const KernelExpr& left() const { return *left_; }
  const KernelExpr& right() const { return *right_; }

  int length() const;    // total node count: 2 * n_leaves - 1
  int n_leaves() const;

  // Preorder node access (0 = this). Returns nullptr when out of range.
  KernelExpr* node_at(int index);
  const KernelExpr* node_at(int index) const;

 private:
  Kind kind_;
  BaseKernel leaf_;
  std::unique_ptr<KernelExpr> left_, right_;
};

bool structurally_equal(const KernelExpr& a, const KernelExpr& b);  // ignores params

// Parse error with a byte offset into the input text.
struct KernelParseError : std::runtime_error {
  KernelParseError(const std::string& msg, size_t pos)
      : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
  size_t position;
};

// Grammar: expr := leaf | ("add"|"mul") "(" expr "," expr ")"
//          leaf := FAMILY "_" ("a"|"y"|"c") [ "(" num { "," num } ")" ]
// Whitespace is insignificant. Aliases: Exp == M12, Mat == M52.
KernelExpr parse_kernel(std::string_view text);

// Bracketed DSL form; round-trips through parse_kernel. Parameters are not
// printed (structural identity only).
std::string format_structural(const KernelExpr& expr);

// Sum-of-products form, e.g. 0.08*RBF_a(0.586)*M12_y(13.33) + 0.02*M52_c(0.079)
// with a middle dot as the product sign. scales follow the slot order of
// scale_slot_count / enumerate below; leaf_params follow preorder leaf order.
std::string format_fitted(const KernelExpr& expr, std::span<const double> scales,
                          std::span<const double> leaf_params);

// Commutative/associative-invariant structural key (params excluded).
std::string canonical_form(const KernelExpr& expr);

struct ExprStats {
  int length = 0;
  int n_leaves = 0;
  int n_additive_components = 0;
  std::array<int, 3> leaves_per_coordinate{};
  bool has_nonstationary = false;
  std::array<bool, 3> rough_by_coordinate{};
  std::array<bool, 3> smooth_by_coordinate{};
  int n_scales = 0;
  int n_kernel_hyperparams = 0;  // scales + per-leaf params
};

ExprStats expr_stats(const KernelExpr& expr);

// Scale-slot convention: one positive coefficient per child of every add
// node, plus one coefficient at the root when the root is not an add node.
// Slot order: root slot first (when present), then preorder--at each add
// node, left-child slot, left subtree, right-child slot, right subtree.
int scale_slot_count(const KernelExpr& expr);

// The nodes each scale slot multiplies, in slot order.
std::vector<const KernelExpr*> enumerate_scale_slots(const KernelExpr& expr);

std::vector<const KernelExpr*> leaves_preorder(const KernelExpr& expr);

enum class Transform : uint8_t { Identity, Log, Atanh };

// Layout of the full hyperparameter vector theta for one expression:
//   [beta0, beta_ag, scales..., leaf params..., sigma2]
// with an elementwise constraint map to an unconstrained optimizer space.
struct ModelLayout {
  struct KernelParamInfo {
    bool is_scale = false;
    int leaf_index = -1;   // preorder leaf ordinal, -1 for scales
    Family family = Family::M12;
    Coordinate coord = Coordinate::Age;
    int param_index = 0;   // within the leaf (AR2 has 2)
  };

  int n_scales = 0;
  int n_leaf_params = 0;
  std::vector<std::string> names;       // size dim()
  std::vector<Transform> transforms;    // size dim()
  std::vector<KernelParamInfo> kernel_info;  // size n_kernel()

  int n_kernel() const { return n_scales + n_leaf_params; }
  int dim() const { return 3 + n_kernel(); }
  int kernel_offset() const { return 2; }
  int sigma2_index() const { return 2 + n_kernel(); }

  static ModelLayout of(const KernelExpr& expr);
};

}  // namespace mortgp
