#include <doctest.h>

#include <random>

#include "mortgp/errors.hpp"
#include "mortgp/expr.hpp"
#include "test_support.hpp"

using namespace mortgp;

namespace {

// Random operand permutation plus re-association: flatten maximal same-op
// chains, shuffle, rebuild with random binary shapes. Canonical keys must be
// invariant under this.
KernelExpr rebuild_random(std::vector<KernelExpr>& ops, KernelExpr::Kind op, size_t lo, size_t hi,
                          std::mt19937_64& rng) {
  if (hi - lo == 1) return std::move(ops[lo]);
  std::uniform_int_distribution<size_t> split(lo + 1, hi - 1);
  const size_t mid = split(rng);
  KernelExpr left = rebuild_random(ops, op, lo, mid, rng);
  KernelExpr right = rebuild_random(ops, op, mid, hi, rng);
  return KernelExpr(op, std::move(left), std::move(right));
}

void collect_chain(const KernelExpr& e, KernelExpr::Kind op, std::vector<const KernelExpr*>& out) {
  if (!e.is_leaf() && e.kind() == op) {
    collect_chain(e.left(), op, out);
    collect_chain(e.right(), op, out);
  } else {
    out.push_back(&e);
  }
}

KernelExpr shuffle_tree(const KernelExpr& e, std::mt19937_64& rng) {
  if (e.is_leaf()) return e;
  std::vector<const KernelExpr*> chain;
  collect_chain(e, e.kind(), chain);
  std::vector<KernelExpr> ops;
  for (const KernelExpr* c : chain) ops.push_back(shuffle_tree(*c, rng));
  std::shuffle(ops.begin(), ops.end(), rng);
  return rebuild_random(ops, e.kind(), 0, ops.size(), rng);
}

}  // namespace

TEST_SUITE("expr") {

TEST_CASE("parse builds the documented trees") {
  KernelExpr e = parse_kernel("add(mul(Min_a, M12_y), M52_c)");
  CHECK(e.length() == 5);
  CHECK(e.n_leaves() == 3);
  CHECK(e.kind() == KernelExpr::Kind::Add);
  CHECK(e.left().kind() == KernelExpr::Kind::Mul);
  CHECK(e.right().leaf().family == Family::M52);
  CHECK(e.right().leaf().coord == Coordinate::Cohort);

  KernelExpr leaf = parse_kernel("M52_c");
  CHECK(leaf.length() == 1);
  CHECK(leaf.is_leaf());

  // the Exp/Mat aliases from the worked tree example
  KernelExpr aliased = parse_kernel("add(Exp_c, mul(RBF_a, add(Mat_y, RBF_c)))");
  CHECK(aliased.length() == 7);
  CHECK(aliased.left().leaf().family == Family::M12);
  CHECK(aliased.right().right().left().leaf().family == Family::M52);
}

TEST_CASE("parse handles params and whitespace") {
  KernelExpr e = parse_kernel("  mul ( M52_a ( 1.11 ) , AR2_y(0.5, 2.0) ) ");
  CHECK(e.left().leaf().params == std::vector<double>{1.11});
  CHECK(e.right().leaf().params == std::vector<double>{0.5, 2.0});
}

TEST_CASE("parse errors carry positions and reject bad leaves") {
  CHECK_THROWS_AS(parse_kernel("add(M12_a"), KernelParseError);
  CHECK_THROWS_AS(parse_kernel("Xyz_a"), KernelParseError);
  CHECK_THROWS_AS(parse_kernel("Lin_a"), KernelParseError);       // year-only family
  CHECK_THROWS_AS(parse_kernel("AR2_a(1.0)"), KernelParseError);  // needs 2 params
  CHECK_THROWS_AS(parse_kernel("M12_a(1,2)"), KernelParseError);
  CHECK_THROWS_AS(parse_kernel("add(M12_a, M12_y) trailing"), KernelParseError);
  try {
    parse_kernel("add(M12_a, Qqq_y)");
    CHECK(false);
  } catch (const KernelParseError& e) {
    CHECK(e.position == 10);
  }
  CHECK(parse_kernel("Lin_y").leaf().family == Family::Lin);
}

TEST_CASE("structural format round-trips") {
  const std::string text = "add(mul(Min_a, M12_y), M52_c)";
  CHECK(format_structural(parse_kernel(text)) == text);
  CHECK(format_structural(parse_kernel("M12_a")) == "M12_a");
}

TEST_CASE("fitted format reproduces the printed sum-of-products forms") {
  KernelExpr syb = parse_kernel("add(mul(RBF_a, M12_y), M52_c)");
  const std::vector<double> scales = {0.08, 0.02};
  const std::vector<double> params = {0.586, 13.33, 0.079};
  CHECK(format_fitted(syb, scales, params) ==
        "0.08·RBF_a(0.586)·M12_y(13.33) + 0.02·M52_c(0.079)");

  // nested additive factor inside a product
  KernelExpr nested =
      parse_kernel("mul(AR2_a, mul(M12_y, mul(M32_c, add(M12_c, mul(M32_a, M52_c)))))");
  const std::vector<double> nscales = {0.01, 4.6211, 0.01};
  const std::vector<double> nparams = {1.12, 1.88, 24.18, 0.72, 13.49, 0.02, 0.1};
  CHECK(format_fitted(nested, nscales, nparams) ==
        "0.01·AR2_a(1.12,1.88)·M12_y(24.18)·M32_c(0.72)·"
        "[4.6211·M12_c(13.49) + 0.01·M32_a(0.02)·M52_c(0.1)]");

  CHECK_THROWS(format_fitted(syb, std::vector<double>{0.08}, params));  // missing a scale
}

TEST_CASE("random structural round-trip") {
  std::mt19937_64 rng(20240811);
  for (int i = 0; i < 1000; ++i) {
    KernelExpr t = testsupport::random_tree(rng);
    KernelExpr back = parse_kernel(format_structural(t));
    CHECK(structurally_equal(t, back));
  }
}

TEST_CASE("canonical keys ignore operand order and association") {
  CHECK(canonical_form(parse_kernel("mul(M12_y, Min_a)")) ==
        canonical_form(parse_kernel("mul(Min_a, M12_y)")));
  CHECK(canonical_form(parse_kernel("mul(mul(M12_a, M52_y), RBF_c)")) ==
        canonical_form(parse_kernel("mul(M12_a, mul(M52_y, RBF_c))")));
  CHECK(canonical_form(parse_kernel("add(M12_a, M52_y)")) !=
        canonical_form(parse_kernel("mul(M12_a, M52_y)")));
}

TEST_CASE("canonical keys survive random shuffles") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    KernelExpr t = testsupport::random_tree(rng);
    const std::string key = canonical_form(t);
    KernelExpr s = shuffle_tree(t, rng);
    CHECK(canonical_form(s) == key);
    CHECK(s.n_leaves() == t.n_leaves());
  }
}

TEST_CASE("expr_stats matches the documented counts") {
  const ExprStats syb = expr_stats(parse_kernel("add(mul(RBF_a, M12_y), M52_c)"));
  CHECK(syb.length == 5);
  CHECK(syb.n_leaves == 3);
  CHECK(syb.n_additive_components == 2);
  CHECK(syb.n_scales == 2);
  CHECK(syb.n_kernel_hyperparams == 5);
  CHECK(syb.leaves_per_coordinate == std::array<int, 3>{1, 1, 1});
  CHECK(syb.rough_by_coordinate == std::array<bool, 3>{false, true, false});
  CHECK(syb.smooth_by_coordinate == std::array<bool, 3>{true, false, true});
  CHECK_FALSE(syb.has_nonstationary);

  const ExprStats leaf = expr_stats(parse_kernel("RBF_a"));
  CHECK(leaf.length == 1);
  CHECK(leaf.n_additive_components == 1);
  CHECK(leaf.n_kernel_hyperparams == 2);  // one scale + one lengthscale

  const ExprStats us = expr_stats(
      parse_kernel("mul(AR2_a, mul(M12_y, mul(M32_c, add(M12_c, mul(M32_a, M52_c)))))"));
  CHECK(us.n_additive_components == 2);
  CHECK(us.has_nonstationary == false);

  const ExprStats nonstat = expr_stats(parse_kernel("mul(Meh_c, RBF_a)"));
  CHECK(nonstat.has_nonstationary);
}

TEST_CASE("length identity holds on random trees") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    KernelExpr t = testsupport::random_tree(rng, 13);
    CHECK(t.length() == 2 * t.n_leaves() - 1);
    CHECK(expr_stats(t).length == t.length());
  }
}

TEST_CASE("scale slots follow the add-children-plus-root convention") {
  CHECK(scale_slot_count(parse_kernel("mul(M12_a, mul(M52_y, RBF_c))")) == 1);
  CHECK(scale_slot_count(parse_kernel("add(M12_a, M52_y)")) == 2);
  CHECK(scale_slot_count(parse_kernel("add(mul(RBF_a, M12_y), M52_c)")) == 2);
  CHECK(scale_slot_count(parse_kernel("mul(M12_a, add(M52_y, RBF_c))")) == 3);
  CHECK(scale_slot_count(parse_kernel("add(add(M12_a, M52_y), RBF_c)")) == 4);
  CHECK(scale_slot_count(parse_kernel("RBF_a")) == 1);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    KernelExpr t = testsupport::random_tree(rng);
    int adds = 0;
    for (int k = 0; k < t.length(); ++k) {
      if (!t.node_at(k)->is_leaf() && t.node_at(k)->kind() == KernelExpr::Kind::Add) ++adds;
    }
    const int want = 2 * adds + (t.kind() == KernelExpr::Kind::Add ? 0 : 1);
    CHECK(scale_slot_count(t) == want);
    CHECK(static_cast<int>(enumerate_scale_slots(t).size()) == want);
  }
}

TEST_CASE("node_at walks preorder") {
  KernelExpr e = parse_kernel("add(mul(Min_a, M12_y), M52_c)");
  CHECK(e.node_at(0) == &e);
  CHECK(e.node_at(1)->kind() == KernelExpr::Kind::Mul);
  CHECK(e.node_at(2)->leaf().family == Family::Min);
  CHECK(e.node_at(3)->leaf().family == Family::M12);
  CHECK(e.node_at(4)->leaf().family == Family::M52);
  CHECK(e.node_at(5) == nullptr);
}

}  // TEST_SUITE
