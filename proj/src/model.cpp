#include "hamid/model.hpp"

#include "hamid/errors.hpp"

#include <unordered_set>

namespace hamid {

HamiltonianModel::HamiltonianModel(int n, std::vector<ModelTerm> terms,
                                   std::vector<std::string> parameter_names)
    : n_(n), terms_(std::move(terms)), names_(std::move(parameter_names)) {
  if (n < 1 || n > kMaxQubits) throw DimensionError("model qubit count out of range");

  std::size_t max_index = 0;
  bool any_unknown = false;
  std::unordered_set<PauliString, PauliStringHash> seen;
  for (const ModelTerm& t : terms_) {
    if (t.pauli.n != n) throw DimensionError("term " + t.pauli.to_string() + " has wrong qubit count");
    if (t.pauli.is_identity()) throw Error("model terms must be non-identity words");
    if (!seen.insert(t.pauli).second) throw Error("duplicate model term " + t.pauli.to_string());
    if (const auto* u = std::get_if<Unknown>(&t.slot)) {
      any_unknown = true;
      max_index = std::max(max_index, u->index);
    }
  }
  const std::size_t count = any_unknown ? max_index + 1 : 0;
  if (names_.empty()) {
    for (std::size_t i = 0; i < count; ++i) names_.push_back("theta" + std::to_string(i));
  }
  if (names_.size() != count) {
    throw Error("parameter names (" + std::to_string(names_.size()) +
                ") do not match unknown slots (" + std::to_string(count) + ")");
  }
  std::vector<bool> used(count, false);
  for (const ModelTerm& t : terms_) {
    if (const auto* u = std::get_if<Unknown>(&t.slot)) used[u->index] = true;
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!used[i]) throw Error("parameter '" + names_[i] + "' drives no term");
  }
}

std::vector<double> HamiltonianModel::coefficients(std::span<const double> theta) const {
  if (theta.size() != parameter_count()) {
    throw DimensionError("expected " + std::to_string(parameter_count()) + " parameters, got " +
                         std::to_string(theta.size()));
  }
  std::vector<double> c;
  c.reserve(terms_.size());
  for (const ModelTerm& t : terms_) {
    if (const auto* k = std::get_if<Known>(&t.slot)) {
      c.push_back(k->value);
    } else {
      const auto& u = std::get<Unknown>(t.slot);
      c.push_back(u.scale * theta[u.index]);
    }
  }
  return c;
}

std::vector<PauliString> HamiltonianModel::generators() const {
  std::vector<PauliString> out;
  out.reserve(terms_.size());
  for (const ModelTerm& t : terms_) out.push_back(t.pauli);
  return out;
}

Eigen::MatrixXcd HamiltonianModel::dense_hamiltonian(std::span<const double> theta) const {
  const std::vector<double> c = coefficients(theta);
  const Eigen::Index dim = Eigen::Index{1} << n_;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t m = 0; m < terms_.size(); ++m) h += c[m] * dense_matrix(terms_[m].pauli);
  return h;
}

}  // namespace hamid
