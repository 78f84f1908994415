#include <doctest.h>

#include <cmath>
#include <random>

#include "mortgp/kernels.hpp"
#include "test_support.hpp"

using namespace mortgp;

namespace {

const Family kStationary[] = {Family::M12, Family::M32, Family::M52,
                              Family::Chy, Family::RBF, Family::AR2};
const Family kAll[] = {Family::M12, Family::M32, Family::M52, Family::Chy, Family::RBF,
                       Family::AR2, Family::Lin, Family::Min, Family::Meh};

BaseKernel make_leaf(Family f, std::vector<double> params) {
  BaseKernel k;
  k.family = f;
  k.coord = f == Family::Lin ? Coordinate::Year : Coordinate::Age;
  k.params = std::move(params);
  return k;
}

std::vector<double> random_leaf_params(Family f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> log_len(std::log(0.08), std::log(2.5));
  std::uniform_real_distribution<double> rho(-0.9, 0.9);
  if (f == Family::Meh) {
    double v = rho(rng);
    if (std::fabs(v) < 1e-3) v = 0.2;
    return {v};
  }
  std::vector<double> out;
  for (int i = 0; i < family_param_count(f); ++i) out.push_back(std::exp(log_len(rng)));
  return out;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("hand-evaluated covariance values") {
  // M12 at unit lag and unit lengthscale
  CHECK(base_cov(make_leaf(Family::M12, {1.0}), 1.0, 0.0).value ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  // Mehler variance at x = 1 with rho = 0.5: exp((rho/(rho+1)) x^2)
  CHECK(base_cov(make_leaf(Family::Meh, {0.5}), 1.0, 1.0).value ==
        doctest::Approx(std::exp(1.0 / 3.0)).epsilon(1e-6));
  // Min offset: t0^2 + min(u, v)
  CHECK(base_cov(make_leaf(Family::Min, {2.0}), 0.3, 0.7).value == doctest::Approx(4.3));
  // Lin offset: sigma0^2 + u v
  CHECK(base_cov(make_leaf(Family::Lin, {0.5}), 0.4, 0.5).value == doctest::Approx(0.45));
}

TEST_CASE("stationary kernels are normalized at zero lag") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Family f : kStationary) {
    for (int i = 0; i < 50; ++i) {
      const auto params = random_leaf_params(f, rng);
      const double u = unif(rng);
      CHECK(base_cov(make_leaf(f, params), u, u).value == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("stationary kernels stay within [-1, 1] over a lag grid") {
  std::mt19937_64 rng(12);
  for (Family f : kStationary) {
    for (int i = 0; i < 30; ++i) {
      const auto params = random_leaf_params(f, rng);
      for (int lag = 0; lag <= 40; ++lag) {
        const double r = lag / 40.0;
        const double v = base_cov(make_leaf(f, params), r, 0.0).value;
        CHECK(std::fabs(v) <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("out-of-domain parameters are rejected") {
  CHECK_THROWS(base_cov(make_leaf(Family::M12, {0.0}), 0.1, 0.2));
  CHECK_THROWS(base_cov(make_leaf(Family::M12, {-1.0}), 0.1, 0.2));
  CHECK_THROWS(base_cov(make_leaf(Family::Meh, {1.5}), 0.1, 0.2));
  CHECK_THROWS(base_cov(make_leaf(Family::Meh, {-1.0}), 0.1, 0.2));
  CHECK_THROWS(base_cov(make_leaf(Family::RBF, {}), 0.1, 0.2));  // unbound
}

TEST_CASE("analytic gradients match central differences per family") {
  // finite differences taken on the unconstrained parameterization
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double h = 1e-5;
  for (Family f : kAll) {
    for (int rep = 0; rep < 100; ++rep) {
      auto params = random_leaf_params(f, rng);
      const double u = unif(rng), v = unif(rng);
      const BaseKernel leaf = make_leaf(f, params);
      const CovValue cv = base_cov(leaf, u, v);
      for (int pi = 0; pi < family_param_count(f); ++pi) {
        const bool is_rho = f == Family::Meh;
        const double w0 = is_rho ? std::atanh(params[pi]) : std::log(params[pi]);
        auto eval_at = [&](double w) {
          auto p = params;
          p[pi] = is_rho ? std::tanh(w) : std::exp(w);
          return base_cov(make_leaf(f, p), u, v).value;
        };
        const double fd = (eval_at(w0 + h) - eval_at(w0 - h)) / (2.0 * h);
        const double chain = is_rho ? 1.0 - params[pi] * params[pi] : params[pi];
        const double analytic = cv.grad[pi] * chain;
        const double denom = std::max({std::fabs(fd), std::fabs(analytic), 1e-8});
        CHECK(std::fabs(analytic - fd) / denom <= 1e-4);
      }
    }
  }
}

TEST_CASE("ar mappings recover the reported persistence parameters") {
  // SYB's M12_y lengthscale on the scaled axis over a 29-year span
  CHECK(ar_mappings(13.33, std::nullopt, 29.0).phi1 == doctest::Approx(0.9974).epsilon(1e-4));
  CHECK(ar_mappings(8.933, std::nullopt, 29.0).phi1 == doctest::Approx(0.9960).epsilon(2.5e-4));

  // AR2 with a huge period degenerates to phi1 = 2 sqrt(-phi2)
  const ArMapping m = ar_mappings(5.0, 1e9, 29.0);
  CHECK(m.is_ar2);
  CHECK(m.phi2 == doctest::Approx(-std::exp(-2.0 / 5.0)).epsilon(1e-12));
  CHECK(m.phi1 == doctest::Approx(2.0 * std::sqrt(-m.phi2)).epsilon(1e-9));

  CHECK_THROWS(ar_mappings(1.0, std::nullopt, 0.0));
  CHECK_THROWS(ar_mappings(-1.0, std::nullopt, 29.0));
}

TEST_CASE("family metadata") {
  CHECK(family_param_count(Family::AR2) == 2);
  CHECK(family_param_count(Family::RBF) == 1);
  for (Family f : kStationary) CHECK(family_is_stationary(f));
  CHECK_FALSE(family_is_stationary(Family::Min));
  for (Family f : {Family::M12, Family::Min, Family::M32, Family::AR2}) {
    CHECK(family_is_rough(f));
  }
  CHECK_FALSE(family_is_rough(Family::RBF));
  for (Family f : {Family::Lin, Family::Min, Family::Meh}) {
    CHECK(family_is_nonstationary(f));
  }
  CHECK(family_from_name("Exp") == Family::M12);
  CHECK(family_from_name("Mat") == Family::M52);
  CHECK_FALSE(family_from_name("Nope").has_value());
}

}  // TEST_SUITE
