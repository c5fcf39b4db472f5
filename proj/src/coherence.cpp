#include "hamid/coherence.hpp"

#include "hamid/errors.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <unordered_set>

namespace hamid {

Eigen::MatrixXd LinearGenerator::at(std::span<const double> theta) const {
  if (theta.size() != per_parameter.size()) {
    throw DimensionError("generator expects " + std::to_string(per_parameter.size()) +
                         " parameters, got " + std::to_string(theta.size()));
  }
  Eigen::MatrixXd a = constant;
  for (std::size_t i = 0; i < theta.size(); ++i) a += theta[i] * per_parameter[i];
  return a;
}

std::vector<PauliString> measured_words(std::span<const Observable> observables) {
  std::vector<PauliString> out;
  std::unordered_set<PauliString, PauliStringHash> seen;
  for (const Observable& o : observables) {
    for (const auto& [word, weight] : o.terms) {
      if (weight == 0.0 || word.is_identity()) continue;
      if (seen.insert(word).second) out.push_back(word);
    }
  }
  return out;
}

PauliBasis filtration(std::span<const PauliString> measured, const HamiltonianModel& model) {
  const int n = model.qubits();
  std::vector<PauliString> current(measured.begin(), measured.end());
  std::unordered_set<PauliString, PauliStringHash> members;
  for (const PauliString& p : current) {
    if (p.n != n) throw DimensionError("measured word " + p.to_string() + " has wrong qubit count");
    if (p.is_identity()) throw Error("measured set may not contain the identity");
    members.insert(p);
  }
  if (current.empty()) throw Error("filtration needs at least one measured word");

  const std::vector<PauliString> delta = model.generators();
  // Only the words added in the previous round can produce new commutators.
  std::size_t frontier_begin = 0;
  while (frontier_begin < current.size()) {
    const std::size_t frontier_end = current.size();
    for (std::size_t g = frontier_begin; g < frontier_end; ++g) {
      for (const PauliString& h : delta) {
        const auto term = structure_term(current[g], h);
        if (term && members.insert(term->word).second) current.push_back(term->word);
      }
    }
    frontier_begin = frontier_end;
  }

  const std::size_t n_measured = measured.size();
  std::sort(current.begin() + static_cast<std::ptrdiff_t>(n_measured), current.end(),
            canonical_less);
  return PauliBasis(n, std::move(current));
}

namespace {

// Calls f(k, l, c) for each accessible k and each term m with
// A_kl += c_m * 2^{n/2} * C_mkl.
template <typename F>
void for_each_generator_entry(const HamiltonianModel& model, const PauliBasis& accessible, F&& f) {
  const double amp = std::pow(2.0, 0.5 * model.qubits());
  const auto& terms = model.terms();
  for (std::size_t m = 0; m < terms.size(); ++m) {
    for (std::size_t k = 0; k < accessible.size(); ++k) {
      const auto st = structure_term(terms[m].pauli, accessible[k]);
      if (!st) continue;
      const auto l = accessible.index_of(st->word);
      if (!l) {
        throw ClosureError("accessible set not closed: [" + terms[m].pauli.to_string() + ", " +
                           accessible[k].to_string() + "] produces " + st->word.to_string());
      }
      f(m, k, *l, amp * st->coefficient);
    }
  }
}

}  // namespace

LinearGenerator linear_generator(const HamiltonianModel& model, const PauliBasis& accessible) {
  const auto dim = static_cast<Eigen::Index>(accessible.size());
  LinearGenerator gen;
  gen.constant = Eigen::MatrixXd::Zero(dim, dim);
  gen.per_parameter.assign(model.parameter_count(), Eigen::MatrixXd::Zero(dim, dim));
  const auto& terms = model.terms();
  for_each_generator_entry(model, accessible, [&](std::size_t m, std::size_t k, std::size_t l, double c) {
    const auto ki = static_cast<Eigen::Index>(k);
    const auto li = static_cast<Eigen::Index>(l);
    if (const auto* known = std::get_if<Known>(&terms[m].slot)) {
      gen.constant(ki, li) += known->value * c;
    } else {
      const auto& u = std::get<Unknown>(terms[m].slot);
      gen.per_parameter[u.index](ki, li) += u.scale * c;
    }
  });
  return gen;
}

Eigen::MatrixXd build_generator(const HamiltonianModel& model, std::span<const double> theta,
                                const PauliBasis& accessible) {
  const std::vector<double> coeff = model.coefficients(theta);
  const auto dim = static_cast<Eigen::Index>(accessible.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for_each_generator_entry(model, accessible, [&](std::size_t m, std::size_t k, std::size_t l, double c) {
    a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) += coeff[m] * c;
  });
  return a;
}

Eigen::MatrixXd build_selector(std::span<const Observable> observables, const PauliBasis& accessible) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(observables.size()),
                                            static_cast<Eigen::Index>(accessible.size()));
  for (std::size_t i = 0; i < observables.size(); ++i) {
    for (const auto& [word, weight] : observables[i].terms) {
      if (word.is_identity() || weight == 0.0) continue;
      const auto k = accessible.index_of(word);
      if (!k) throw Error("observable word " + word.to_string() + " is not in the accessible set");
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*k)) += weight;
    }
  }
  return c;
}

Eigen::VectorXd initial_coherence(const Eigen::VectorXcd& psi0, const PauliBasis& accessible) {
  const Eigen::Index dim = Eigen::Index{1} << accessible.qubits();
  if (psi0.size() != dim) throw DimensionError("initial state has wrong dimension");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "initial state is not normalized (norm " << psi0.norm() << ")";
    throw NormalizationError(msg.str());
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(accessible.size()));
  for (std::size_t k = 0; k < accessible.size(); ++k) {
    x(static_cast<Eigen::Index>(k)) = expectation(psi0, accessible[k]);
  }
  return x;
}

CoherenceSystem make_system(const HamiltonianModel& model, std::span<const double> theta,
                            std::span<const Observable> observables, const Eigen::VectorXcd& psi0) {
  const std::vector<PauliString> measured = measured_words(observables);
  CoherenceSystem sys;
  sys.accessible = filtration(measured, model);
  sys.generator = build_generator(model, theta, sys.accessible);
  sys.selector = build_selector(observables, sys.accessible);
  sys.x0 = initial_coherence(psi0, sys.accessible);
  return sys;
}

std::vector<std::size_t> absent_parameters(const LinearGenerator& gen) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < gen.per_parameter.size(); ++i) {
    if (gen.per_parameter[i].cwiseAbs().maxCoeff() == 0.0) out.push_back(i);
  }
  return out;
}

double nyquist_max_dt(const Eigen::MatrixXd& generator) {
  if (generator.size() == 0 || generator.cwiseAbs().maxCoeff() == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  const Eigen::VectorXcd ev = generator.eigenvalues();
  const double rho = ev.cwiseAbs().maxCoeff();
  if (rho == 0.0) return std::numeric_limits<double>::infinity();
  return M_PI / rho;
}

std::size_t samples_for_duration(double duration, double dt) {
  if (!(dt > 0.0) || !(duration >= 0.0)) throw Error("duration and dt must be positive");
  return static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
}

TimeTrace simulate_trace(const CoherenceSystem& sys, double dt, std::size_t samples,
                         Diagnostics* diag) {
  if (!(dt > 0.0)) throw Error("simulate_trace: dt must be positive");
  if (samples < 2) throw InsufficientSamplesError("simulate_trace: need at least two samples");
  const double bound = nyquist_max_dt(sys.generator);
  if (diag != nullptr && dt >= bound) {
    std::ostringstream msg;
    msg << "sampling period " << dt << " s violates the Nyquist bound " << bound << " s";
    diag->warnings.push_back(msg.str());
  }
  const Eigen::MatrixXd step = (sys.generator * dt).exp();

  TimeTrace trace;
  trace.dt = dt;
  trace.samples.resize(static_cast<Eigen::Index>(samples), sys.selector.rows());
  Eigen::VectorXd x = sys.x0;
  for (std::size_t j = 0; j < samples; ++j) {
    trace.samples.row(static_cast<Eigen::Index>(j)) = (sys.selector * x).transpose();
    x = step * x;
  }
  return trace;
}

TimeTrace add_noise(const TimeTrace& trace, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error("add_noise: sigma must be nonnegative");
  TimeTrace out = trace;
  out.noise_sigma = sigma;
  out.seed = seed;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index j = 0; j < out.samples.rows(); ++j) {
    for (Eigen::Index c = 0; c < out.samples.cols(); ++c) out.samples(j, c) += normal(rng);
  }
  return out;
}

namespace {

// Kronecker-product construction, kept apart from the bit-mask path.
Eigen::MatrixXcd kron_word(const PauliString& p) {
  using C = std::complex<double>;
  Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  Eigen::Matrix2cd sx;
  sx << C(0, 0), C(1, 0), C(1, 0), C(0, 0);
  Eigen::Matrix2cd sy;
  sy << C(0, 0), C(0, -1), C(0, 1), C(0, 0);
  Eigen::Matrix2cd sz;
  sz << C(1, 0), C(0, 0), C(0, 0), C(-1, 0);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int k = 0; k < p.n; ++k) {
    const char l = p.letter(k);
    const Eigen::Matrix2cd& f = l == 'X' ? sx : l == 'Y' ? sy : l == 'Z' ? sz : id;
    out = Eigen::kroneckerProduct(out, f).eval();
  }
  return out;
}

}  // namespace

TimeTrace quantum_oracle_trace(const HamiltonianModel& model, std::span<const double> theta,
                               const Eigen::VectorXcd& psi0, std::span<const Observable> observables,
                               double dt, std::size_t samples) {
  const int n = model.qubits();
  if (n > 10) throw DimensionError("quantum_oracle_trace: n > 10 is too large for dense simulation");
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (psi0.size() != dim) throw DimensionError("initial state has wrong dimension");

  const std::vector<double> c = model.coefficients(theta);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t m = 0; m < c.size(); ++m) h += c[m] * kron_word(model.terms()[m].pauli);

  std::vector<Eigen::MatrixXcd> ops;
  for (const Observable& o : observables) {
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& [word, weight] : o.terms) op += weight * kron_word(word);
    ops.push_back(std::move(op));
  }

  const Eigen::MatrixXcd u = (std::complex<double>(0.0, -dt) * h).exp();
  TimeTrace trace;
  trace.dt = dt;
  trace.samples.resize(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(ops.size()));
  Eigen::VectorXcd psi = psi0;
  for (std::size_t j = 0; j < samples; ++j) {
    for (std::size_t i = 0; i < ops.size(); ++i) {
      trace.samples(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          psi.dot(ops[i] * psi).real();
    }
    psi = u * psi;
  }
  return trace;
}

}  // namespace hamid
