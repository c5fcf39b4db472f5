#pragma once

// XX spin chain with a local field per site:
//   H = sum_k (w_k / 2) sz_k + sum_k d_k (s+_k s-_{k+1} + s-_k s+_{k+1}).
//
// The chain follows the spin-chain convention in which |0> is spin down,
// sz = |1><1| - |0><0|, so the field term is emitted as -(w_k / 2) Z_k in
// standard Pauli words. The hopping term expands to (d_k / 2)(XX + YY).

#include "hamid/experiment.hpp"
#include "hamid/model.hpp"

#include <vector>

namespace hamid {

struct ChainSpec {
  int n = 1;
  std::vector<double> omegas;  // n entries, 1/s
  std::vector<double> deltas;  // n - 1 entries, 1/s
  // Unknown flags for (omega_1..omega_n, delta_1..delta_{n-1}); empty = all unknown.
  std::vector<bool> unknown;

  void validate() const;
  bool is_unknown(std::size_t slot) const { return unknown.empty() || unknown[slot]; }
  // Values of the unknown slots, in model parameter order.
  std::vector<double> unknown_values() const;
};

HamiltonianModel generate_chain_model(const ChainSpec& spec);

// Chain model measured through <sx> on the first site, prepared in
// (|0> + i|1>)/sqrt(2) on site 1 and |0> elsewhere.
Experiment chain_experiment(const ChainSpec& spec);

// The three-site benchmark: w = (1.3, 2.4, 1.7), d = (4.3, 5.2).
ChainSpec benchmark_chain();

}  // namespace hamid
