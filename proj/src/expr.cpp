#include "mortgp/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <stdexcept>

#include "mortgp/errors.hpp"

namespace mortgp {

KernelExpr::KernelExpr(Kind op, KernelExpr left, KernelExpr right)
    : kind_(op),
      left_(std::make_unique<KernelExpr>(std::move(left))),
      right_(std::make_unique<KernelExpr>(std::move(right))) {
  if (op == Kind::Leaf) throw std::invalid_argument("operator constructor needs add/mul");
}

KernelExpr::KernelExpr(const KernelExpr& other) : kind_(other.kind_), leaf_(other.leaf_) {
  if (other.left_) left_ = std::make_unique<KernelExpr>(*other.left_);
  if (other.right_) right_ = std::make_unique<KernelExpr>(*other.right_);
}

KernelExpr& KernelExpr::operator=(const KernelExpr& other) {
  if (this == &other) return *this;
  KernelExpr tmp(other);
  *this = std::move(tmp);
  return *this;
}

int KernelExpr::length() const {
  if (is_leaf()) return 1;
  return 1 + left_->length() + right_->length();
}

int KernelExpr::n_leaves() const {
  if (is_leaf()) return 1;
  return left_->n_leaves() + right_->n_leaves();
}

namespace {
KernelExpr* node_at_impl(KernelExpr* node, int& counter, int target) {
  if (counter == target) return node;
  ++counter;
  if (node->is_leaf()) return nullptr;
  if (KernelExpr* hit = node_at_impl(const_cast<KernelExpr*>(&node->left()), counter, target))
    return hit;
  return node_at_impl(const_cast<KernelExpr*>(&node->right()), counter, target);
}
}  // namespace

KernelExpr* KernelExpr::node_at(int index) {
  if (index < 0) return nullptr;
  int counter = 0;
  return node_at_impl(this, counter, index);
}

const KernelExpr* KernelExpr::node_at(int index) const {
  return const_cast<KernelExpr*>(this)->node_at(index);
}

bool structurally_equal(const KernelExpr& a, const KernelExpr& b) {
  if (a.kind() != b.kind()) return false;
  if (a.is_leaf()) {
    return a.leaf().family == b.leaf().family && a.leaf().coord == b.leaf().coord;
  }
  return structurally_equal(a.left(), b.left()) && structurally_equal(a.right(), b.right());
}

// ----------------------------------------------------------------- parsing

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  KernelExpr parse() {
    KernelExpr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after expression");
    return e;
  }

 private:
  std::string_view text_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) { throw KernelParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  char peek() { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string ident() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])))) {
      ++pos_;
    }
    if (pos_ == start) fail("expected identifier");
    return std::string(text_.substr(start, pos_ - start));
  }

  double number() {
    skip_ws();
    double value = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) fail("expected a number");
    pos_ = static_cast<size_t>(ptr - text_.data());
    return value;
  }

  KernelExpr parse_expr() {
    skip_ws();
    const size_t name_pos = pos_;
    std::string name = ident();
    if (name == "add" || name == "mul") {
      expect('(');
      KernelExpr lhs = parse_expr();
      expect(',');
      KernelExpr rhs = parse_expr();
      expect(')');
      return KernelExpr(name == "add" ? KernelExpr::Kind::Add : KernelExpr::Kind::Mul,
                        std::move(lhs), std::move(rhs));
    }
    // leaf: FAMILY token may contain the '_' separator already consumed? No:
    // ident() stops at '_', so the family name is exactly `name`.
    auto fam = family_from_name(name);
    if (!fam) {
      pos_ = name_pos;
      fail("unknown kernel family '" + name + "'");
    }
    skip_ws();
    if (peek() != '_') fail("expected '_' and a coordinate suffix");
    ++pos_;
    skip_ws();
    if (pos_ >= text_.size()) fail("expected coordinate suffix");
    std::string suffix(1, text_[pos_]);
    auto coord = coordinate_from_suffix(suffix);
    if (!coord) fail("coordinate suffix must be one of a, y, c");
    ++pos_;

    BaseKernel leaf;
    leaf.family = *fam;
    leaf.coord = *coord;
    skip_ws();
    if (peek() == '(') {
      ++pos_;
      leaf.params.push_back(number());
      skip_ws();
      while (peek() == ',') {
        ++pos_;
        leaf.params.push_back(number());
        skip_ws();
      }
      expect(')');
    }
    const size_t leaf_pos = name_pos;
    try {
      validate_base_kernel(leaf);
    } catch (const std::exception& e) {
      throw KernelParseError(e.what(), leaf_pos);
    }
    return KernelExpr(std::move(leaf));
  }
};

}  // namespace

KernelExpr parse_kernel(std::string_view text) { return Parser(text).parse(); }

// -------------------------------------------------------------- formatting

namespace {

std::string leaf_token(const BaseKernel& k) {
  return std::string(family_name(k.family)) + "_" + coordinate_suffix(k.coord);
}

void format_structural_impl(const KernelExpr& e, std::string& out) {
  if (e.is_leaf()) {
    out += leaf_token(e.leaf());
    return;
  }
  out += e.kind() == KernelExpr::Kind::Add ? "add(" : "mul(";
  format_structural_impl(e.left(), out);
  out += ", ";
  format_structural_impl(e.right(), out);
  out += ')';
}

std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct FittedPrinter {
  std::span<const double> scales;
  std::span<const double> leaf_params;
  size_t scale_cursor = 0;
  size_t leaf_cursor = 0;

  std::string next_scale() {
    if (scale_cursor >= scales.size()) throw UsageError("fitted format: missing scale values");
    return fmt_num(scales[scale_cursor++]);
  }

  std::string leaf_str(const BaseKernel& k) {
    const int np = family_param_count(k.family);
    if (leaf_cursor + np > leaf_params.size()) {
      throw UsageError("fitted format: missing leaf parameter values");
    }
    std::string s = leaf_token(k) + "(";
    for (int i = 0; i < np; ++i) {
      if (i) s += ",";
      s += fmt_num(leaf_params[leaf_cursor++]);
    }
    s += ")";
    return s;
  }

  // Multiplicative factor list for a non-add node; nested adds render bracketed.
  void factors(const KernelExpr& e, std::vector<std::string>& out) {
    if (e.is_leaf()) {
      out.push_back(leaf_str(e.leaf()));
    } else if (e.kind() == KernelExpr::Kind::Mul) {
      factors(e.left(), out);
      factors(e.right(), out);
    } else {
      out.push_back("[" + render_add(e) + "]");
    }
  }

  std::string render_term(const KernelExpr& child) {
    std::string scale = next_scale();
    std::vector<std::string> fs;
    factors(child, fs);
    std::string term = scale;
    for (const auto& f : fs) term += "·" + f;
    return term;
  }

  std::string render_add(const KernelExpr& add_node) {
    return render_term(add_node.left()) + " + " + render_term(add_node.right());
  }

  std::string render_root(const KernelExpr& root) {
    if (root.kind() == KernelExpr::Kind::Add) return render_add(root);
    return render_term(root);
  }
};

}  // namespace

std::string format_structural(const KernelExpr& expr) {
  std::string out;
  format_structural_impl(expr, out);
  return out;
}

std::string format_fitted(const KernelExpr& expr, std::span<const double> scales,
                          std::span<const double> leaf_params) {
  FittedPrinter printer{scales, leaf_params};
  std::string s = printer.render_root(expr);
  if (printer.scale_cursor != scales.size()) {
    throw UsageError("fitted format: too many scale values for this expression");
  }
  return s;
}

// ---------------------------------------------------------- canonical form

namespace {

void collect_operands(const KernelExpr& e, KernelExpr::Kind op, std::vector<std::string>& out);

std::string canonical_impl(const KernelExpr& e) {
  if (e.is_leaf()) return leaf_token(e.leaf());
  std::vector<std::string> operands;
  collect_operands(e, e.kind(), operands);
  std::sort(operands.begin(), operands.end());
  std::string out = e.kind() == KernelExpr::Kind::Add ? "add(" : "mul(";
  for (size_t i = 0; i < operands.size(); ++i) {
    if (i) out += ',';
    out += operands[i];
  }
  out += ')';
  return out;
}

void collect_operands(const KernelExpr& e, KernelExpr::Kind op, std::vector<std::string>& out) {
  if (!e.is_leaf() && e.kind() == op) {
    collect_operands(e.left(), op, out);
    collect_operands(e.right(), op, out);
  } else {
    out.push_back(canonical_impl(e));
  }
}

}  // namespace

std::string canonical_form(const KernelExpr& expr) { return canonical_impl(expr); }

// ---------------------------------------------------------------- stats

namespace {

int comps(const KernelExpr& e) {
  if (e.is_leaf()) return 1;
  if (e.kind() == KernelExpr::Kind::Add) return comps(e.left()) + comps(e.right());
  return comps(e.left()) * comps(e.right());
}

void count_scale_slots(const KernelExpr& e, int& n) {
  if (e.is_leaf()) return;
  if (e.kind() == KernelExpr::Kind::Add) n += 2;
  count_scale_slots(e.left(), n);
  count_scale_slots(e.right(), n);
}

void enumerate_slots_impl(const KernelExpr& e, std::vector<const KernelExpr*>& out) {
  if (e.is_leaf()) return;
  if (e.kind() == KernelExpr::Kind::Add) {
    out.push_back(&e.left());
    enumerate_slots_impl(e.left(), out);
    out.push_back(&e.right());
    enumerate_slots_impl(e.right(), out);
  } else {
    enumerate_slots_impl(e.left(), out);
    enumerate_slots_impl(e.right(), out);
  }
}

void leaves_impl(const KernelExpr& e, std::vector<const KernelExpr*>& out) {
  if (e.is_leaf()) {
    out.push_back(&e);
    return;
  }
  leaves_impl(e.left(), out);
  leaves_impl(e.right(), out);
}

}  // namespace

int scale_slot_count(const KernelExpr& expr) {
  int n = expr.kind() == KernelExpr::Kind::Add ? 0 : 1;
  count_scale_slots(expr, n);
  return n;
}

std::vector<const KernelExpr*> enumerate_scale_slots(const KernelExpr& expr) {
  std::vector<const KernelExpr*> out;
  if (expr.kind() != KernelExpr::Kind::Add) out.push_back(&expr);
  enumerate_slots_impl(expr, out);
  return out;
}

std::vector<const KernelExpr*> leaves_preorder(const KernelExpr& expr) {
  std::vector<const KernelExpr*> out;
  leaves_impl(expr, out);
  return out;
}

ExprStats expr_stats(const KernelExpr& expr) {
  ExprStats st;
  st.length = expr.length();
  st.n_leaves = expr.n_leaves();
  st.n_additive_components = comps(expr);
  st.n_scales = scale_slot_count(expr);
  int leaf_params = 0;
  for (const KernelExpr* leaf : leaves_preorder(expr)) {
    const BaseKernel& k = leaf->leaf();
    const int c = static_cast<int>(k.coord);
    st.leaves_per_coordinate[c] += 1;
    leaf_params += family_param_count(k.family);
    if (family_is_nonstationary(k.family)) st.has_nonstationary = true;
    if (family_is_rough(k.family)) {
      st.rough_by_coordinate[c] = true;
    } else {
      st.smooth_by_coordinate[c] = true;
    }
  }
  st.n_kernel_hyperparams = st.n_scales + leaf_params;
  return st;
}

ModelLayout ModelLayout::of(const KernelExpr& expr) {
  ModelLayout layout;
  layout.names = {"beta0", "beta_ag"};
  layout.transforms = {Transform::Identity, Transform::Identity};

  layout.n_scales = scale_slot_count(expr);
  for (int i = 0; i < layout.n_scales; ++i) {
    layout.names.push_back("scale" + std::to_string(i + 1));
    layout.transforms.push_back(Transform::Log);
    KernelParamInfo info;
    info.is_scale = true;
    layout.kernel_info.push_back(info);
  }

  const auto leaves = leaves_preorder(expr);
  for (size_t li = 0; li < leaves.size(); ++li) {
    const BaseKernel& k = leaves[li]->leaf();
    const int np = family_param_count(k.family);
    for (int pi = 0; pi < np; ++pi) {
      layout.names.push_back("leaf" + std::to_string(li + 1) + "." + family_name(k.family) +
                             "_" + coordinate_suffix(k.coord) + "." +
                             family_param_name(k.family, pi));
      layout.transforms.push_back(k.family == Family::Meh ? Transform::Atanh : Transform::Log);
      KernelParamInfo info;
      info.leaf_index = static_cast<int>(li);
      info.family = k.family;
      info.coord = k.coord;
      info.param_index = pi;
      layout.kernel_info.push_back(info);
      ++layout.n_leaf_params;
    }
  }

  layout.names.push_back("sigma2");
  layout.transforms.push_back(Transform::Log);
  return layout;
}

}  // namespace mortgp
