#pragma once

// Coherence-vector dynamics restricted to the accessible set.
//
// Coordinates are Pauli-word expectations x_k = <psi|P_k|psi>, so each entry
// lies in [-1, 1] and a measured word contributes a selector entry of 1. The
// generator is the same in any uniform rescaling of the orthonormal basis.

#include "hamid/model.hpp"
#include "hamid/pauli.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hamid {

// O = sum_i weight_i P_i over raw words.
struct Observable {
  std::string label;
  std::vector<std::pair<PauliString, double>> terms;

  static Observable word(const PauliString& p) { return Observable{p.to_string(), {{p, 1.0}}}; }
};

// Generator of the accessible dynamics as an affine function of theta:
// A(theta) = constant + sum_i theta_i * per_parameter[i].
struct LinearGenerator {
  Eigen::MatrixXd constant;
  std::vector<Eigen::MatrixXd> per_parameter;

  Eigen::MatrixXd at(std::span<const double> theta) const;
};

struct CoherenceSystem {
  PauliBasis accessible;
  Eigen::MatrixXd generator;  // K x K, 1/s
  Eigen::MatrixXd selector;   // p x K
  Eigen::VectorXd x0;         // K

  std::size_t order() const { return accessible.size(); }
  std::size_t outputs() const { return static_cast<std::size_t>(selector.rows()); }
};

struct TimeTrace {
  double dt = 0.0;
  Eigen::MatrixXd samples;  // J x p, row j = y(j dt)
  double noise_sigma = 0.0;
  std::optional<std::uint64_t> seed;
  std::string initial_state_label;
  std::vector<std::string> channel_labels;

  std::size_t length() const { return static_cast<std::size_t>(samples.rows()); }
  std::size_t channels() const { return static_cast<std::size_t>(samples.cols()); }
};

// Human-readable warnings collected while a computation proceeds.
struct Diagnostics {
  std::vector<std::string> warnings;
};

// Basis words appearing with nonzero weight in any observable, first-seen order.
std::vector<PauliString> measured_words(std::span<const Observable> observables);

// Fixed point of G_i = [G_{i-1}, Delta] u G_{i-1} starting from the measured
// words. The result lists the measured words first, then every other
// accessible word in canonical order.
PauliBasis filtration(std::span<const PauliString> measured, const HamiltonianModel& model);

// Decomposes the restricted generator per parameter. Throws ClosureError when
// a commutator leaves the accessible set.
LinearGenerator linear_generator(const HamiltonianModel& model, const PauliBasis& accessible);

// A_kl = sum_m C_mkl a_m on the accessible indices; exactly antisymmetric.
Eigen::MatrixXd build_generator(const HamiltonianModel& model, std::span<const double> theta,
                                const PauliBasis& accessible);

Eigen::MatrixXd build_selector(std::span<const Observable> observables, const PauliBasis& accessible);

// x_k = <psi|P_k|psi>. Throws NormalizationError when | ||psi|| - 1 | > 1e-10.
Eigen::VectorXd initial_coherence(const Eigen::VectorXcd& psi0, const PauliBasis& accessible);

CoherenceSystem make_system(const HamiltonianModel& model, std::span<const double> theta,
                            std::span<const Observable> observables, const Eigen::VectorXcd& psi0);

// Parameters that never reach the accessible generator; a nonempty result
// means they cannot be recovered from the chosen observables.
std::vector<std::size_t> absent_parameters(const LinearGenerator& gen);

// pi / max |eigenvalue|; +infinity for the zero generator.
double nyquist_max_dt(const Eigen::MatrixXd& generator);

// y(j) = C exp(A j dt) x0 for j = 0..samples-1, propagated with one matrix
// exponential. A Nyquist violation adds a warning to `diag` and proceeds.
TimeTrace simulate_trace(const CoherenceSystem& sys, double dt, std::size_t samples,
                         Diagnostics* diag = nullptr);

// Adds i.i.d. N(0, sigma^2) to every sample; deterministic in `seed`.
TimeTrace add_noise(const TimeTrace& trace, double sigma, std::uint64_t seed);

// Dense Schrodinger propagation of the full state, for cross-checking the
// coherence path. Limited to n <= 10.
TimeTrace quantum_oracle_trace(const HamiltonianModel& model, std::span<const double> theta,
                               const Eigen::VectorXcd& psi0, std::span<const Observable> observables,
                               double dt, std::size_t samples);

// Sample count covering [0, duration] at period dt (inclusive endpoints).
std::size_t samples_for_duration(double duration, double dt);

}  // namespace hamid
