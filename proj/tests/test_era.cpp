#include "hamid/chain.hpp"
#include "hamid/era.hpp"
#include "hamid/errors.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace hamid;

namespace {

TimeTrace benchmark_trace() {
  const Experiment e = chain_experiment(benchmark_chain());
  return simulate_trace(e.system(), 0.0598, samples_for_duration(20.0, 0.0598));
}

std::vector<double> sorted_imag(const Eigen::VectorXcd& ev) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < ev.size(); ++i) out.push_back(ev(i).imag());
  std::sort(out.begin(), out.end());
  return out;
}

TimeTrace rotation_trace(double w, double dt, std::size_t samples) {
  TimeTrace tr;
  tr.dt = dt;
  tr.samples.resize(static_cast<Eigen::Index>(samples), 1);
  for (std::size_t j = 0; j < samples; ++j) tr.samples(static_cast<Eigen::Index>(j), 0) = -std::sin(w * dt * static_cast<double>(j));
  return tr;
}

}  // namespace

TEST(Era, HankelLayout) {
  TimeTrace tr;
  tr.dt = 1.0;
  tr.samples.resize(10, 2);
  for (Eigen::Index j = 0; j < 10; ++j) {
    tr.samples(j, 0) = static_cast<double>(j);
    tr.samples(j, 1) = 100.0 + static_cast<double>(j);
  }
  const HankelConfig cfg = HankelConfig::consecutive(3, 4);
  const Eigen::MatrixXd h1 = build_hankel(tr, cfg, 1);
  ASSERT_EQ(h1.rows(), 6);
  ASSERT_EQ(h1.cols(), 4);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index l = 0; l < 4; ++l) {
      EXPECT_EQ(h1(2 * i, l), static_cast<double>(i + l + 1));
      EXPECT_EQ(h1(2 * i + 1, l), 100.0 + static_cast<double>(i + l + 1));
    }
  }
  EXPECT_EQ(cfg.required_samples(), 7u);
  EXPECT_THROW(build_hankel(tr, HankelConfig::consecutive(6, 6), 1), InsufficientSamplesError);
}

TEST(Era, BenchmarkOrderIsSix) {
  const TimeTrace tr = benchmark_trace();
  ASSERT_EQ(tr.length(), 335u);
  const HankelConfig cfg = HankelConfig::for_length(tr.length());
  EXPECT_EQ(cfg.r, 167u);
  EXPECT_EQ(cfg.s, 167u);
  const Realization real = era_from_trace(tr);
  EXPECT_EQ(real.n_sigma, 6u);
  EXPECT_EQ(real.singular_values.size(), 167);
  EXPECT_GT(real.singular_values(5) / real.singular_values(6), 1e10);
  EXPECT_LT(gap_epsilon(real.singular_values), real.singular_values(5));
  EXPECT_GT(gap_epsilon(real.singular_values), real.singular_values(6));
}

TEST(Era, RealizationReproducesTrace) {
  const TimeTrace tr = benchmark_trace();
  const Realization real = era_from_trace(tr);
  const ResidualReport rep = verify_realization(real, tr);
  EXPECT_LT(rep.max_abs, 1e-8);
  EXPECT_FALSE(rep.flagged);
}

TEST(Era, SpectrumMatchesTrueGenerator) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 1 + trial % 4;
    const Experiment e = chain_experiment(test_support::random_chain(rng, n));
    const CoherenceSystem sys = e.system();
    const double dt = 0.4 * nyquist_max_dt(sys.generator);
    const TimeTrace tr = simulate_trace(sys, dt, 240);
    const Realization real = continuous_generator(era_from_trace(tr), dt);
    ASSERT_EQ(real.n_sigma, sys.order()) << "trial " << trial;
    const auto got = sorted_imag(real.Acont->eigenvalues());
    const auto want = sorted_imag(sys.generator.eigenvalues());
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-6) << "trial " << trial;
  }
}

TEST(Era, NonConsecutiveOffsets) {
  const TimeTrace tr = benchmark_trace();
  HankelConfig cfg;
  cfg.r = 40;
  cfg.s = 40;
  for (std::size_t i = 1; i < 40; ++i) {
    cfg.row_offsets.push_back(2 * i);
    cfg.col_offsets.push_back(3 * i);
  }
  EraOptions opts;
  opts.hankel = cfg;
  const Realization real = continuous_generator(era_from_trace(tr, opts), tr.dt);
  EXPECT_EQ(real.n_sigma, 6u);
  EXPECT_LT(verify_realization(real, tr).max_abs, 1e-8);
  const Experiment e = chain_experiment(benchmark_chain());
  const auto got = sorted_imag(real.Acont->eigenvalues());
  const auto want = sorted_imag(e.system().generator.eigenvalues());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-6);
}

TEST(Era, FixedOrderAndExplicitEpsilon) {
  const TimeTrace tr = add_noise(benchmark_trace(), 0.05, 9);
  EraOptions opts;
  opts.order = 6;
  EXPECT_EQ(era_from_trace(tr, opts).n_sigma, 6u);
  opts.order.reset();
  opts.epsilon = 1e-300;
  EXPECT_EQ(era_from_trace(tr, opts).n_sigma, 167u);
}

TEST(Era, NoiseFloorRuleKeepsBenchmarkOrder) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const TimeTrace tr = add_noise(benchmark_trace(), 0.05, seed);
    EXPECT_EQ(era_from_trace(tr).n_sigma, 6u) << "seed " << seed;
  }
}

TEST(Era, EmptyTraceHasNoDynamics) {
  TimeTrace tr;
  tr.dt = 0.1;
  tr.samples = Eigen::MatrixXd::Zero(50, 1);
  EXPECT_THROW(era_from_trace(tr), EmptySystemError);
}

TEST(Era, TooFewSamples) {
  TimeTrace tr;
  tr.dt = 0.1;
  tr.samples = Eigen::MatrixXd::Ones(2, 1);
  EXPECT_THROW(era_from_trace(tr), InsufficientSamplesError);
  EraOptions opts;
  opts.hankel = HankelConfig::consecutive(10, 10);
  tr.samples = Eigen::MatrixXd::Ones(15, 1);
  EXPECT_THROW(era_from_trace(tr, opts), InsufficientSamplesError);
}

TEST(Era, AliasingGuardSingleQubit) {
  const double w = 2.0;
  const double limit = M_PI / w;
  // Below the limit: recovered frequency is exact.
  {
    const double dt = 0.9 * limit;
    const Realization real = continuous_generator(era_from_trace(rotation_trace(w, dt, 40)), dt);
    const auto f = sorted_imag(real.Acont->eigenvalues());
    EXPECT_NEAR(f.back(), w, 1e-8);
  }
  // Exactly at the limit the sampled rotation is -1.
  EXPECT_THROW(continuous_generator(era_from_trace(rotation_trace(w, limit, 40)), limit), AliasingError);
  // Above the limit the samples alias onto 2 pi / dt - w; a spectral bound catches it.
  {
    const double dt = 1.1 * limit;
    const Realization real = era_from_trace(rotation_trace(w, dt, 40));
    const Realization aliased = continuous_generator(real, dt);
    EXPECT_NEAR(sorted_imag(aliased.Acont->eigenvalues()).back(), 2.0 * M_PI / dt - w, 1e-8);
    LogOptions opts;
    opts.spectral_bound = w;
    EXPECT_THROW(continuous_generator(real, dt, opts), AliasingError);
  }
}

TEST(Era, PolarProjectionKeepsUnitaryPart) {
  const TimeTrace tr = add_noise(benchmark_trace(), 0.01, 4);
  LogOptions opts;
  opts.project_unit_circle = true;
  const Realization real = continuous_generator(era_from_trace(tr), tr.dt, opts);
  const Eigen::MatrixXd a = *real.Acont;
  EXPECT_LT((a + a.transpose()).norm(), 1e-9 * a.norm());
}

TEST(Era, SingularValueCsv) {
  const Realization real = era_from_trace(benchmark_trace());
  std::ostringstream os;
  write_singular_values_csv(os, real);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "index,singular_value,retained");
  std::size_t rows = 0;
  std::size_t retained = 0;
  while (std::getline(is, line)) {
    ++rows;
    if (line.back() == '1') ++retained;
  }
  EXPECT_EQ(rows, 167u);
  EXPECT_EQ(retained, 6u);
}
