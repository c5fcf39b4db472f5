#pragma once

// Independent reference constructions shared by the test binaries. Nothing
// here calls into the library's Pauli or propagation code.

#include "hamid/chain.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <complex>
#include <random>
#include <string>

namespace test_support {

using cd = std::complex<double>;

inline Eigen::Matrix2cd letter_matrix(char c) {
  Eigen::Matrix2cd m;
  switch (c) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, cd(0, -1), cd(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m.setIdentity();
  }
  return m;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

// Leftmost letter is the most significant tensor factor.
inline Eigen::MatrixXcd word_matrix(const std::string& letters) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
  for (char c : letters) m = kron(m, letter_matrix(c));
  return m;
}

// Chain Hamiltonian assembled from raising/lowering operators, with
// sz = |1><1| - |0><0| on each site.
inline Eigen::MatrixXcd chain_hamiltonian(const hamid::ChainSpec& spec) {
  const int n = spec.n;
  Eigen::Matrix2cd sz, sp, sm;
  sz << -1, 0, 0, 1;
  sp << 0, 0, 1, 0;  // |1><0|
  sm << 0, 1, 0, 0;  // |0><1|
  auto site = [n](int k, const Eigen::MatrixXcd& op) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
    for (int q = 0; q < n; ++q) m = kron(m, q == k ? op : Eigen::MatrixXcd(Eigen::Matrix2cd::Identity()));
    return m;
  };
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (int k = 0; k < n; ++k) h += 0.5 * spec.omegas[static_cast<std::size_t>(k)] * site(k, sz);
  for (int k = 0; k + 1 < n; ++k) {
    h += spec.deltas[static_cast<std::size_t>(k)] * (site(k, sp) * site(k + 1, sm) + site(k, sm) * site(k + 1, sp));
  }
  return h;
}

inline hamid::ChainSpec random_chain(std::mt19937_64& rng, int n, double bound = 5.0) {
  std::uniform_real_distribution<double> u(-bound, bound);
  hamid::ChainSpec spec;
  spec.n = n;
  for (int k = 0; k < n; ++k) spec.omegas.push_back(u(rng));
  for (int k = 0; k + 1 < n; ++k) spec.deltas.push_back(u(rng));
  return spec;
}

inline Eigen::VectorXcd random_state(std::mt19937_64& rng, Eigen::Index dim) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd psi(dim);
  for (Eigen::Index i = 0; i < dim; ++i) psi(i) = cd(g(rng), g(rng));
  return psi / psi.norm();
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = g(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ();
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace test_support
