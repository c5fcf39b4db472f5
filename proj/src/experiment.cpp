#include "hamid/experiment.hpp"

#include "hamid/errors.hpp"

#include <cmath>

namespace hamid {

InitialState plus_i_state(int n, int qubit) {
  if (n < 1 || n > 20) throw DimensionError("plus_i_state: qubit count out of range");
  if (qubit < 0 || qubit >= n) throw DimensionError("plus_i_state: qubit index out of range");
  const Eigen::Index dim = Eigen::Index{1} << n;
  InitialState s;
  s.label = "plus_i_qubit=" + std::to_string(qubit);
  s.psi = Eigen::VectorXcd::Zero(dim);
  const double r = 1.0 / std::sqrt(2.0);
  s.psi(0) = r;
  s.psi(Eigen::Index{1} << (n - 1 - qubit)) = std::complex<double>(0.0, r);
  return s;
}

InitialState basis_state(const std::string& bits) {
  const int n = static_cast<int>(bits.size());
  if (n < 1 || n > 20) throw DimensionError("basis_state: qubit count out of range");
  Eigen::Index index = 0;
  for (char b : bits) {
    if (b != '0' && b != '1') throw ParseError("basis_state: expected a string of 0/1");
    index = (index << 1) | (b == '1' ? 1 : 0);
  }
  InitialState s;
  s.label = "basis=" + bits;
  s.psi = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
  s.psi(index) = 1.0;
  return s;
}

CoherenceSystem Experiment::system() const {
  const std::vector<double> theta = has_nominal() ? nominal : std::vector<double>(model.parameter_count(), 0.0);
  return make_system(model, theta, observables, initial_state.psi);
}

}  // namespace hamid
