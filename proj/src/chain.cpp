#include "hamid/chain.hpp"

#include "hamid/errors.hpp"

namespace hamid {

void ChainSpec::validate() const {
  if (n < 1) throw Error("chain needs at least one site");
  if (omegas.size() != static_cast<std::size_t>(n)) throw Error("chain needs one omega per site");
  if (deltas.size() != static_cast<std::size_t>(n - 1)) throw Error("chain needs n-1 couplings");
  if (!unknown.empty() && unknown.size() != static_cast<std::size_t>(2 * n - 1)) {
    throw Error("chain unknown flags need 2n-1 entries");
  }
}

std::vector<double> ChainSpec::unknown_values() const {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) {
    if (is_unknown(static_cast<std::size_t>(k))) out.push_back(omegas[static_cast<std::size_t>(k)]);
  }
  for (int k = 0; k + 1 < n; ++k) {
    if (is_unknown(static_cast<std::size_t>(n + k))) out.push_back(deltas[static_cast<std::size_t>(k)]);
  }
  return out;
}

HamiltonianModel generate_chain_model(const ChainSpec& spec) {
  spec.validate();
  const int n = spec.n;
  std::vector<ModelTerm> terms;
  std::vector<std::string> names;
  std::size_t next = 0;

  for (int k = 0; k < n; ++k) {
    const auto slot_index = static_cast<std::size_t>(k);
    const PauliString z = PauliString::single(n, k, 'Z');
    if (spec.is_unknown(slot_index)) {
      terms.push_back({z, Unknown{next++, -0.5}});
      names.push_back("w" + std::to_string(k + 1));
    } else {
      terms.push_back({z, Known{-0.5 * spec.omegas[slot_index]}});
    }
  }
  for (int k = 0; k + 1 < n; ++k) {
    const auto slot_index = static_cast<std::size_t>(n + k);
    PauliString xx = PauliString::single(n, k, 'X');
    xx.x_mask |= PauliString::single(n, k + 1, 'X').x_mask;
    PauliString yy = xx;
    yy.z_mask = xx.x_mask;
    if (spec.is_unknown(slot_index)) {
      terms.push_back({xx, Unknown{next, 0.5}});
      terms.push_back({yy, Unknown{next, 0.5}});
      ++next;
      names.push_back("d" + std::to_string(k + 1));
    } else {
      const double v = 0.5 * spec.deltas[static_cast<std::size_t>(k)];
      terms.push_back({xx, Known{v}});
      terms.push_back({yy, Known{v}});
    }
  }
  return HamiltonianModel(n, std::move(terms), std::move(names));
}

Experiment chain_experiment(const ChainSpec& spec) {
  Experiment e;
  e.model = generate_chain_model(spec);
  e.observables = {Observable::word(PauliString::single(spec.n, 0, 'X'))};
  e.initial_state = plus_i_state(spec.n, 0);
  e.nominal = spec.unknown_values();
  return e;
}

ChainSpec benchmark_chain() {
  ChainSpec spec;
  spec.n = 3;
  spec.omegas = {1.3, 2.4, 1.7};
  spec.deltas = {4.3, 5.2};
  return spec;
}

}  // namespace hamid
