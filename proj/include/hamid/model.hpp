#pragma once

#include "hamid/pauli.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hamid {

// Fixed coefficient of a Pauli word, in 1/s.
struct Known {
  double value = 0.0;
};

// Coefficient scale * theta[index]. A parameter may drive several words
// (an XX + YY hopping term, for instance).
struct Unknown {
  std::size_t index = 0;
  double scale = 1.0;
};

using Slot = std::variant<Known, Unknown>;

struct ModelTerm {
  PauliString pauli;
  Slot slot;
};

// H(theta) = sum_m c_m(theta) P_m over raw Pauli words P_m.
//
// In the orthonormal basis X_m = P_m / 2^{n/2} the coefficients are
// a_m = 2^{n/2} c_m = tr(H X_m).
class HamiltonianModel {
 public:
  HamiltonianModel() = default;
  HamiltonianModel(int n, std::vector<ModelTerm> terms, std::vector<std::string> parameter_names = {});

  int qubits() const { return n_; }
  const std::vector<ModelTerm>& terms() const { return terms_; }
  std::size_t parameter_count() const { return names_.size(); }
  const std::vector<std::string>& parameter_names() const { return names_; }

  // Pauli-word coefficient c_m for each term.
  std::vector<double> coefficients(std::span<const double> theta) const;
  // The generating set: every term's word.
  std::vector<PauliString> generators() const;

  Eigen::MatrixXcd dense_hamiltonian(std::span<const double> theta) const;

 private:
  int n_ = 0;
  std::vector<ModelTerm> terms_;
  std::vector<std::string> names_;
};

}  // namespace hamid
