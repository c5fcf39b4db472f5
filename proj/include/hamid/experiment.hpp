#pragma once

#include "hamid/coherence.hpp"
#include "hamid/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace hamid {

struct InitialState {
  std::string label;
  Eigen::VectorXcd psi;
};

// (|0> + i|1>)/sqrt(2) on `qubit`, |0> on every other qubit.
InitialState plus_i_state(int n, int qubit);
// Computational basis state; bits[0] is qubit 0.
InitialState basis_state(const std::string& bits);

// Everything a model file describes: the parameterized Hamiltonian, what is
// measured, how the system is prepared, and (optionally) nominal parameters.
struct Experiment {
  HamiltonianModel model;
  std::vector<Observable> observables;
  InitialState initial_state;
  std::vector<double> nominal;  // empty when the file gives no values

  bool has_nominal() const { return nominal.size() == model.parameter_count() && !nominal.empty(); }
  // Accessible set, selector and initial vector; the generator is evaluated
  // at the nominal parameters when present, otherwise at zero.
  CoherenceSystem system() const;
};

}  // namespace hamid
