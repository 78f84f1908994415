#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "mortgp/gram.hpp"
#include "test_support.hpp"

using namespace mortgp;
namespace ts = testsupport;

TEST_SUITE("gram") {

TEST_CASE("zero lag on a separable product gives the scale everywhere") {
  KernelExpr e = parse_kernel("mul(RBF_a, RBF_y)");
  Eigen::MatrixXd X(2, 3);
  X << 0.3, 0.6, 0.5, 0.3, 0.6, 0.5;  // two identical points
  const std::vector<double> kp = {0.7, 0.4, 0.3};  // scale, len_a, len_y
  Eigen::MatrixXd K = gram(e, kp, X, X);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) CHECK(K(i, j) == doctest::Approx(0.7).epsilon(1e-12));
  }
}

TEST_CASE("gram matches the naive recursive oracle on random instances") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 120; ++rep) {
    KernelExpr t = ts::random_tree(rng);
    std::vector<double> scales, leaf_params;
    ts::random_params(t, rng, scales, leaf_params);
    Eigen::MatrixXd X1 = ts::random_inputs(rng, 5);
    Eigen::MatrixXd X2 = ts::random_inputs(rng, 4);

    std::vector<double> kp = scales;
    kp.insert(kp.end(), leaf_params.begin(), leaf_params.end());
    Eigen::MatrixXd K = gram(t, kp, X1, X2);
    Eigen::MatrixXd K0 = ts::naive_gram(t, scales, leaf_params, X1, X2);
    CHECK((K - K0).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + K0.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("additivity: gram of add is the scaled sum of part grams") {
  std::mt19937_64 rng(22);
  KernelExpr a = parse_kernel("mul(RBF_a, M12_y)");
  KernelExpr b = parse_kernel("M52_c");
  KernelExpr sum = parse_kernel("add(mul(RBF_a, M12_y), M52_c)");
  Eigen::MatrixXd X = ts::random_inputs(rng, 6);

  const std::vector<double> kp_sum = {0.08, 0.02, 0.586, 0.46, 0.079};
  Eigen::MatrixXd K = gram(sum, kp_sum, X, X);
  Eigen::MatrixXd Ka = gram(a, std::vector<double>{1.0, 0.586, 0.46}, X, X);
  Eigen::MatrixXd Kb = gram(b, std::vector<double>{1.0, 0.079}, X, X);
  CHECK((K - (0.08 * Ka + 0.02 * Kb)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("gram is symmetric and positive semi-definite on random point sets") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 60; ++rep) {
    KernelExpr t = ts::random_tree(rng);
    std::vector<double> scales, leaf_params;
    ts::random_params(t, rng, scales, leaf_params);
    std::vector<double> kp = scales;
    kp.insert(kp.end(), leaf_params.begin(), leaf_params.end());
    Eigen::MatrixXd X = ts::random_inputs(rng, 8);
    Eigen::MatrixXd K = gram(t, kp, X, X);

    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * K.trace());
  }
}

TEST_CASE("explicit gradient matrices match finite differences of gram entries") {
  std::mt19937_64 rng(24);
  for (int rep = 0; rep < 40; ++rep) {
    KernelExpr t = ts::random_tree(rng, 7);
    std::vector<double> scales, leaf_params;
    ts::random_params(t, rng, scales, leaf_params);
    std::vector<double> kp = scales;
    kp.insert(kp.end(), leaf_params.begin(), leaf_params.end());
    Eigen::MatrixXd X = ts::random_inputs(rng, 4);

    GramWithGradients g = gram_with_gradients(t, kp, X);
    const double h = 1e-6;
    for (size_t p = 0; p < kp.size(); ++p) {
      auto up = kp, dn = kp;
      up[p] += h;
      dn[p] -= h;
      Eigen::MatrixXd fd = (gram(t, up, X, X) - gram(t, dn, X, X)) / (2.0 * h);
      const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
      CHECK((g.dK[p] - fd).cwiseAbs().maxCoeff() / scale <= 1e-5);
    }
  }
}

TEST_CASE("backward contractions agree with the explicit matrices") {
  std::mt19937_64 rng(25);
  for (int rep = 0; rep < 40; ++rep) {
    KernelExpr t = ts::random_tree(rng);
    std::vector<double> scales, leaf_params;
    ts::random_params(t, rng, scales, leaf_params);
    std::vector<double> kp = scales;
    kp.insert(kp.end(), leaf_params.begin(), leaf_params.end());
    Eigen::MatrixXd X = ts::random_inputs(rng, 5);

    GramEvaluator ev(t, X, X);
    ev.forward(kp.data());
    Eigen::MatrixXd W = Eigen::MatrixXd::Random(5, 5);
    Eigen::VectorXd g = ev.backward(W);

    ev.forward(kp.data());
    auto dK = ev.gradient_matrices();
    for (size_t p = 0; p < kp.size(); ++p) {
      const double want = W.cwiseProduct(dK[p]).sum();
      CHECK(g[p] == doctest::Approx(want).epsilon(1e-9));
    }
  }
}

TEST_CASE("parameter slice length is validated") {
  KernelExpr e = parse_kernel("mul(RBF_a, RBF_y)");
  std::mt19937_64 rng(1);
  Eigen::MatrixXd X = ts::random_inputs(rng, 3);
  CHECK_THROWS(gram(e, std::vector<double>{1.0, 0.4}, X, X));
}

}  // TEST_SUITE
