#pragma once

// Multi-start damped least squares on the transfer-coefficient equations.

#include "hamid/transfer.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hamid {

enum class Execution { serial, parallel };

// Deterministic seed mixing (splitmix64).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

struct SolveConfig {
  std::size_t starts = 64;
  // Per-parameter search interval; empty means [-box_bound, box_bound] for all.
  std::vector<std::pair<double, double>> box;
  // 0 derives the bound from the largest root modulus of the target P(s),
  // i.e. the spectral radius of the recovered generator.
  double box_bound = 0.0;
  double tol_residual = 1e-6;
  double tol_cluster = 1e-4;  // relative, max-norm
  double tol_class = 1e-6;    // weighted coefficient agreement
  std::uint64_t seed = 1;
  std::size_t max_iterations = 200;
  Execution execution = Execution::parallel;
  ResidualOptions residual;
};

struct ParameterEstimate {
  std::vector<double> theta;
  double residual_norm = 0.0;
  int class_id = -1;
  bool converged = false;
  std::size_t iterations = 0;
};

struct LmResult {
  std::vector<double> theta;
  double residual_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct SolveReport {
  std::vector<ParameterEstimate> estimates;  // distinct accepted solutions, best first
  std::vector<std::string> parameter_names;
  std::vector<std::string> equation_labels;
  std::size_t starts = 0;
  std::size_t converged_starts = 0;
  double best_residual = 0.0;
  std::vector<double> best_theta;
  std::size_t class_count = 0;
  // Classes whose members differ by more than coefficient signs.
  std::vector<int> flagged_classes;
  bool insensitive = false;
  double jacobian_condition = 0.0;  // sigma_min / sigma_max at best_theta
  std::vector<std::string> diagnostics;

  bool found() const { return !estimates.empty(); }
};

// Forward differences with step 1e-6 * max(1, |theta_i|).
Eigen::MatrixXd finite_difference_jacobian(const CoefficientResidual& f, std::span<const double> theta);

LmResult levenberg_marquardt(const CoefficientResidual& f, std::vector<double> theta0,
                             std::size_t max_iterations, double tol_residual, double divergence_bound);

// Largest root modulus of P(s) across targets.
double spectral_box_bound(std::span<const StateTarget> targets);

// Assigns class ids: two estimates share a class when their model coefficients
// agree to `tol` after weighting. Ids follow first appearance.
void classify_equivalents(std::vector<ParameterEstimate>& estimates, const CoefficientResidual& f,
                          double tol);

// Core multi-start driver on a prepared residual.
SolveReport solve_residual(const CoefficientResidual& f, const std::vector<std::string>& names,
                           const SolveConfig& cfg);

SolveReport solve(const HamiltonianModel& model, const TransferFunction& target,
                  const CoherenceSystem& sys_template, const SolveConfig& cfg);

// Stacks the equations of every initial-state target into one system.
SolveReport multi_state_solve(const HamiltonianModel& model, std::vector<StateTarget> targets,
                              const SolveConfig& cfg);

// Text shown when more than one parameter set explains the data.
std::string ambiguity_caveat();

}  // namespace hamid
