#pragma once

// Transfer function G(s) = C (sI - A)^{-1} x0 as a ratio Q(s) / P(s), and the
// coefficient residual that equates the parameterized model with a
// data-derived realization.

#include "hamid/coherence.hpp"
#include "hamid/model.hpp"

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <string>
#include <vector>

namespace hamid {

struct TransferFunction {
  // P(s) = s^K + sum_i den[i] s^i
  Eigen::VectorXd den;
  // Q_c(s) = sum_i num[c][i] s^i, degree <= K - 1, one entry per output channel
  std::vector<Eigen::VectorXd> num;

  std::size_t order() const { return static_cast<std::size_t>(den.size()); }
  std::size_t channels() const { return num.size(); }
  std::complex<double> den_at(std::complex<double> s) const;
  std::complex<double> num_at(std::complex<double> s, std::size_t channel) const;
  std::complex<double> evaluate(std::complex<double> s, std::size_t channel) const {
    return num_at(s, channel) / den_at(s);
  }
};

// Faddeev-LeVerrier: P from the trace recursion and Q_c = C_c adj(sI - A) x0
// from the adjugate sequence.
TransferFunction transfer_coefficients(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
                                       const Eigen::VectorXd& x0);

// Cancels roots shared by P and every nonzero Q_c (within rel_tol), returning
// a coprime representation with monic P.
TransferFunction reduce_common_factors(const TransferFunction& tf, double rel_tol = 1e-6);

// Transfer function of the model at theta on a fixed accessible set,
// selector and initial vector (the generator of `sys_template` is ignored).
TransferFunction model_coefficients(const HamiltonianModel& model, std::span<const double> theta,
                                    const CoherenceSystem& sys_template);

struct ResidualOptions {
  // Scale each equation by 1 / max(1, |target coefficient|).
  bool weighted = true;
  // Keep only the parameter_count lowest-degree informative equations.
  bool lowest_order_only = false;
};

// One realization target: the data-side transfer function plus the model-side
// accessible set, selector and initial vector for the same initial state.
struct StateTarget {
  TransferFunction target;
  CoherenceSystem system;
  std::string label;
};

struct Equation {
  std::size_t state = 0;
  bool is_numerator = true;
  std::size_t channel = 0;
  std::size_t power = 0;
  std::size_t degree = 0;  // polynomial degree in the generator entries
  std::string label;
};

// Residual map theta -> weighted (model - target) coefficient vector, stacked
// over initial states and channels. Coefficients that vanish identically in
// the model are dropped; the rest are ordered by increasing degree.
class CoefficientResidual {
 public:
  CoefficientResidual(const HamiltonianModel& model, std::vector<StateTarget> targets,
                      ResidualOptions opts = {});

  std::size_t parameters() const { return parameter_count_; }
  std::size_t equations() const { return equations_.size(); }
  const std::vector<Equation>& equation_list() const { return equations_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& target_values() const { return target_; }
  const std::vector<StateTarget>& targets() const { return targets_; }

  // Model coefficients on the selected equations.
  Eigen::VectorXd model_values(std::span<const double> theta) const;
  Eigen::VectorXd operator()(std::span<const double> theta) const;

 private:
  std::vector<TransferFunction> model_transfer(std::span<const double> theta, bool* ok) const;

  std::size_t parameter_count_ = 0;
  std::vector<StateTarget> targets_;
  std::vector<LinearGenerator> generators_;
  std::vector<bool> reduce_;
  std::vector<Equation> equations_;
  Eigen::VectorXd target_;
  Eigen::VectorXd weights_;
};

// Single-state convenience wrapper around CoefficientResidual.
Eigen::VectorXd coefficient_residual(const HamiltonianModel& model, std::span<const double> theta,
                                     const TransferFunction& target, const CoherenceSystem& sys_template,
                                     ResidualOptions opts = {});

}  // namespace hamid
