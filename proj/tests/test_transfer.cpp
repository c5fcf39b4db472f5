#include "hamid/chain.hpp"
#include "hamid/errors.hpp"
#include "hamid/transfer.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hamid;
using test_support::cd;
using test_support::rel_diff;

namespace {

// Monic characteristic polynomial from the eigenvalues, low order first.
Eigen::VectorXd poly_from_eigenvalues(const Eigen::MatrixXd& a) {
  const Eigen::VectorXcd ev = a.eigenvalues();
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(ev.size() + 1);
  c(0) = 1.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    for (Eigen::Index k = i + 1; k > 0; --k) c(k) = c(k - 1) - ev(i) * c(k);
    c(0) = -ev(i) * c(0);
  }
  return c.real().head(ev.size());
}

// Numerator coefficients by interpolating G(s) P(s) at K points on the
// imaginary axis, with G evaluated through a linear solve.
Eigen::VectorXd numerator_by_interpolation(const Eigen::MatrixXd& a, const Eigen::RowVectorXd& c,
                                           const Eigen::VectorXd& x0, const Eigen::VectorXd& den) {
  const Eigen::Index k = a.rows();
  Eigen::MatrixXcd v(k, k);
  Eigen::VectorXcd rhs(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const cd s(0.0, 0.7 * static_cast<double>(i + 1) + 0.3);
    const Eigen::MatrixXcd m = s * Eigen::MatrixXcd::Identity(k, k) - a.cast<cd>();
    const cd g = (c.cast<cd>() * m.partialPivLu().solve(x0.cast<cd>())).value();
    cd p = 1.0;
    for (Eigen::Index j = k - 1; j >= 0; --j) p = p * s + den(j);
    rhs(i) = g * p;
    for (Eigen::Index j = 0; j < k; ++j) v(i, j) = std::pow(s, static_cast<int>(j));
  }
  return v.fullPivLu().solve(rhs).real();
}

CoherenceSystem benchmark_system() { return chain_experiment(benchmark_chain()).system(); }

}  // namespace

TEST(Transfer, BenchmarkCoefficientsMatchOracles) {
  const CoherenceSystem sys = benchmark_system();
  const TransferFunction tf = transfer_coefficients(sys.generator, sys.selector, sys.x0);
  ASSERT_EQ(tf.order(), 6u);
  const Eigen::VectorXd den = poly_from_eigenvalues(sys.generator);
  const Eigen::VectorXd num = numerator_by_interpolation(sys.generator, sys.selector.row(0), sys.x0, den);
  for (Eigen::Index i = 0; i < 6; ++i) {
    EXPECT_NEAR(tf.den(i), den(i), 1e-9 * std::max(1.0, std::abs(den(i))));
    EXPECT_NEAR(tf.num[0](i), num(i), 1e-8 * std::max(1.0, std::abs(num(i))));
  }
}

TEST(Transfer, BenchmarkCoefficientValues) {
  const Experiment e = chain_experiment(benchmark_chain());
  const TransferFunction tf = model_coefficients(e.model, e.nominal, e.system());
  EXPECT_LT(rel_diff(tf.num[0](4), 1.3), 1e-9);
  EXPECT_LT(rel_diff(tf.den(4), 101.4), 1e-9);
  EXPECT_LT(rel_diff(tf.num[0](2), 37.173), 1e-9);
  EXPECT_LT(rel_diff(tf.den(2), 1966.4892), 1e-9);
  EXPECT_LT(rel_diff(tf.num[0](0), 1407.01176), 1e-9);
  EXPECT_LT(rel_diff(tf.den(0), 3755.36096), 1e-9);
  for (Eigen::Index i : {1, 3, 5}) {
    EXPECT_NEAR(tf.den(i), 0.0, 1e-10);
    EXPECT_NEAR(tf.num[0](i), 0.0, 1e-10);
  }
}

TEST(Transfer, EvaluateMatchesResolvent) {
  const CoherenceSystem sys = benchmark_system();
  const TransferFunction tf = transfer_coefficients(sys.generator, sys.selector, sys.x0);
  for (cd s : {cd(0.5, 1.0), cd(-1.0, 3.0), cd(2.0, -0.2)}) {
    const Eigen::MatrixXcd m = s * Eigen::MatrixXcd::Identity(6, 6) - sys.generator.cast<cd>();
    const cd g = (sys.selector.cast<cd>() * m.partialPivLu().solve(sys.x0.cast<cd>()))(0);
    EXPECT_LT(std::abs(tf.evaluate(s, 0) - g), 1e-10 * std::abs(g));
  }
}

TEST(Transfer, SimilarityInvariance) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  for (int mat = 0; mat < 5; ++mat) {
    const Eigen::Index k = 3 + mat;
    Eigen::MatrixXd a(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) a(i, j) = g(rng);
    }
    Eigen::MatrixXd c(2, k);
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = g(rng);
    Eigen::VectorXd x0(k);
    for (Eigen::Index i = 0; i < k; ++i) x0(i) = g(rng);
    const TransferFunction base = transfer_coefficients(a, c, x0);
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::MatrixXd t = test_support::random_orthogonal(rng, k);
      const TransferFunction tf = transfer_coefficients(t * a * t.transpose(), c * t.transpose(), t * x0);
      for (Eigen::Index i = 0; i < k; ++i) {
        EXPECT_NEAR(tf.den(i), base.den(i), 1e-9 * std::max(1.0, std::abs(base.den(i))));
        for (std::size_t ch = 0; ch < 2; ++ch) {
          EXPECT_NEAR(tf.num[ch](i), base.num[ch](i), 1e-9 * std::max(1.0, std::abs(base.num[ch](i))));
        }
      }
    }
  }
}

TEST(Transfer, ReduceCommonFactors) {
  // Two decoupled rotations; x0 excites only the first, so G has order 2.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(0, 1) = -2.0;
  a(1, 0) = 2.0;
  a(2, 3) = -5.0;
  a(3, 2) = 5.0;
  Eigen::MatrixXd c(1, 4);
  c << 1.0, 0.0, 1.0, 0.0;
  Eigen::VectorXd x0(4);
  x0 << 0.0, 1.0, 0.0, 0.0;
  const TransferFunction full = transfer_coefficients(a, c, x0);
  EXPECT_EQ(full.order(), 4u);
  const TransferFunction red = reduce_common_factors(full);
  ASSERT_EQ(red.order(), 2u);
  // G(s) = -2 / (s^2 + 4)
  EXPECT_NEAR(red.den(0), 4.0, 1e-9);
  EXPECT_NEAR(red.den(1), 0.0, 1e-9);
  EXPECT_NEAR(red.num[0](0), -2.0, 1e-9);
  EXPECT_NEAR(red.num[0](1), 0.0, 1e-9);
  for (cd s : {cd(0.3, 1.1), cd(1.0, -2.0)}) EXPECT_LT(std::abs(red.evaluate(s, 0) - full.evaluate(s, 0)), 1e-9);
}

TEST(Transfer, ResidualVanishesAtTruthAndOrdersEquations) {
  const Experiment e = chain_experiment(benchmark_chain());
  const CoherenceSystem sys = e.system();
  const TransferFunction target = model_coefficients(e.model, e.nominal, sys);
  const CoefficientResidual f(e.model, {StateTarget{target, sys, "s"}});
  std::vector<std::string> labels;
  for (const auto& eq : f.equation_list()) labels.push_back(eq.label);
  EXPECT_EQ(labels, (std::vector<std::string>{"q4", "p4", "q2", "p2", "q0", "p0"}));
  EXPECT_LT(f(e.nominal).norm(), 1e-12);

  ResidualOptions low;
  low.lowest_order_only = true;
  const CoefficientResidual g(e.model, {StateTarget{target, sys, "s"}}, low);
  EXPECT_EQ(g.equations(), 5u);
  EXPECT_EQ(g.equation_list().back().label, "q0");

  std::vector<double> off = e.nominal;
  off[0] += 0.1;
  EXPECT_GT(f(off).norm(), 1e-3);
  const Eigen::VectorXd w = f.weights();
  for (Eigen::Index i = 0; i < w.size(); ++i) EXPECT_NEAR(w(i), 1.0 / std::max(1.0, std::abs(f.target_values()(i))), 1e-15);
}

TEST(Transfer, StructuralMismatchIsReported) {
  const Experiment e = chain_experiment(benchmark_chain());
  const CoherenceSystem sys = e.system();
  TransferFunction wrong;
  wrong.den = Eigen::VectorXd::Ones(4);
  wrong.num = {Eigen::VectorXd::Ones(4)};
  EXPECT_THROW(CoefficientResidual(e.model, {StateTarget{wrong, sys, "s"}}), StructuralMismatchError);
}

TEST(Transfer, SignFlipsOfCouplingsShareCoefficients) {
  const Experiment e = chain_experiment(benchmark_chain());
  const CoherenceSystem sys = e.system();
  const TransferFunction base = model_coefficients(e.model, e.nominal, sys);
  for (int mask = 1; mask < 4; ++mask) {
    std::vector<double> theta = e.nominal;
    if (mask & 1) theta[3] = -theta[3];
    if (mask & 2) theta[4] = -theta[4];
    const TransferFunction tf = model_coefficients(e.model, theta, sys);
    EXPECT_LT((tf.den - base.den).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((tf.num[0] - base.num[0]).cwiseAbs().maxCoeff(), 1e-9);
  }
}
