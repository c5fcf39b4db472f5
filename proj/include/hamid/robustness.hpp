#pragma once

// Monte-Carlo noise study: many independently noised copies of one clean
// trace are identified, and the truth-class estimates are summarized per
// noise level and parameter.

#include "hamid/experiment.hpp"
#include "hamid/pipeline.hpp"
#include "hamid/solver.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hamid {

struct RobustnessConfig {
  std::vector<double> sigmas;
  std::size_t trajectories = 500;
  std::uint64_t seed = 1;
  double dt = 0.0598;
  double duration = 20.0;
  IdentifyOptions identify;
  // Truncate every realization at the model's accessible dimension.
  bool fix_order = true;
  Execution execution = Execution::parallel;
};

inline constexpr std::array<double, 5> kQuantileLevels = {0.09, 0.25, 0.50, 0.75, 0.91};

struct CellStats {
  std::size_t count = 0;
  double mean = 0.0;
  double rel_error_mean_pct = 0.0;  // (mean - truth) / truth * 100
  double std = 0.0;                 // sample standard deviation of the estimates
  double rel_error_std_pct = 0.0;   // same, as percent of |truth|
  std::array<double, 5> quantiles{};
  std::array<double, 5> rel_error_quantiles_pct{};
};

struct SigmaResult {
  double sigma = 0.0;
  std::size_t converged = 0;
  std::size_t dropped = 0;
  std::vector<CellStats> cells;                // one per parameter
  std::vector<std::vector<double>> estimates;  // per trajectory; empty when dropped
};

struct RobustnessReport {
  std::vector<std::string> parameter_names;
  std::vector<double> truth;
  std::vector<bool> sign_ambiguous;
  std::size_t trajectories = 0;
  std::uint64_t seed = 0;
  std::vector<SigmaResult> results;
};

// Parameters whose individual sign flip leaves every transfer coefficient
// unchanged at theta.
std::vector<bool> sign_ambiguous_parameters(const Experiment& experiment, const std::vector<double>& theta);

// Estimate closest to truth (max relative deviation) after mapping each
// sign-ambiguous parameter onto the sign of truth. Returns an empty vector
// when there is no estimate.
std::vector<double> truth_class_estimate(const SolveReport& report, const std::vector<double>& truth,
                                         const std::vector<bool>& sign_ambiguous);

// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double level);
CellStats cell_statistics(const std::vector<double>& values, double truth);

RobustnessReport run_robustness(const Experiment& experiment, const RobustnessConfig& cfg);

// sigma,parameter,rel_error_mean_pct
void write_mean_error_csv(std::ostream& os, const RobustnessReport& rep);
// sigma,parameter,std,rel_error_std_pct
void write_spread_csv(std::ostream& os, const RobustnessReport& rep);
// sigma,parameter,q09..q91 of estimates and of relative error
void write_boxplot_csv(std::ostream& os, const RobustnessReport& rep);
// sigma,trajectory,theta...
void write_estimates_csv(std::ostream& os, const RobustnessReport& rep);
std::string robustness_summary_json(const RobustnessReport& rep);

}  // namespace hamid
