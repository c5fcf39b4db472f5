#include "hamid/pauli.hpp"

#include "hamid/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace hamid {

namespace {

std::uint64_t full_mask(int n) {
  return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
}

void check_qubits(int n) {
  if (n < 1 || n > kMaxQubits) {
    throw DimensionError("qubit count must be in [1, " + std::to_string(kMaxQubits) +
                         "], got " + std::to_string(n));
  }
}

// Qubit k lives at bit (n-1-k) of a dense row/column index.
std::uint64_t to_dense_bits(std::uint64_t mask, int n) {
  std::uint64_t out = 0;
  for (int k = 0; k < n; ++k) {
    if ((mask >> k) & 1U) out |= std::uint64_t{1} << (n - 1 - k);
  }
  return out;
}

const std::complex<double> kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

}  // namespace

PauliString PauliString::identity(int n) {
  check_qubits(n);
  return PauliString{n, 0, 0};
}

PauliString PauliString::single(int n, int qubit, char letter) {
  check_qubits(n);
  if (qubit < 0 || qubit >= n) throw DimensionError("qubit index out of range");
  PauliString p{n, 0, 0};
  const std::uint64_t bit = std::uint64_t{1} << qubit;
  switch (letter) {
    case 'I': break;
    case 'X': p.x_mask = bit; break;
    case 'Y': p.x_mask = bit; p.z_mask = bit; break;
    case 'Z': p.z_mask = bit; break;
    default: throw ParseError(std::string("invalid Pauli letter '") + letter + "'");
  }
  return p;
}

PauliString PauliString::parse(std::string_view word) {
  const int n = static_cast<int>(word.size());
  check_qubits(n);
  PauliString p{n, 0, 0};
  for (int k = 0; k < n; ++k) {
    const PauliString f = single(n, k, word[k]);
    p.x_mask |= f.x_mask;
    p.z_mask |= f.z_mask;
  }
  return p;
}

char PauliString::letter(int qubit) const {
  const bool x = (x_mask >> qubit) & 1U;
  const bool z = (z_mask >> qubit) & 1U;
  if (x && z) return 'Y';
  if (x) return 'X';
  if (z) return 'Z';
  return 'I';
}

int PauliString::weight() const { return std::popcount(x_mask | z_mask); }

bool PauliString::commutes_with(const PauliString& other) const {
  // Symplectic form: the words anticommute iff an odd number of qubits clash.
  const int clashes = std::popcount(x_mask & other.z_mask) + std::popcount(z_mask & other.x_mask);
  return clashes % 2 == 0;
}

std::string PauliString::to_string() const {
  std::string s(static_cast<std::size_t>(n), 'I');
  for (int k = 0; k < n; ++k) s[static_cast<std::size_t>(k)] = letter(k);
  return s;
}

std::complex<double> PhasedPauli::phase() const { return kIPow[phase_exponent & 3]; }

PhasedPauli multiply(const PauliString& a, const PauliString& b) {
  if (a.n != b.n) {
    throw DimensionError("multiply: qubit counts differ (" + std::to_string(a.n) + " vs " +
                         std::to_string(b.n) + ")");
  }
  // Write each word as i^{|x&z|} X^x Z^z. Moving Z^{z_a} past X^{x_b} costs
  // (-1)^{|z_a & x_b|}.
  PauliString out{a.n, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask};
  int e = std::popcount(a.x_mask & a.z_mask) + std::popcount(b.x_mask & b.z_mask) +
          2 * std::popcount(a.z_mask & b.x_mask) - std::popcount(out.x_mask & out.z_mask);
  e %= 4;
  if (e < 0) e += 4;
  return PhasedPauli{e, out};
}

bool canonical_less(const PauliString& a, const PauliString& b) {
  if (a.n != b.n) return a.n < b.n;
  const int wa = a.weight();
  const int wb = b.weight();
  if (wa != wb) return wa < wb;
  const std::uint64_t sa = a.x_mask | a.z_mask;
  const std::uint64_t sb = b.x_mask | b.z_mask;
  if (sa != sb) {
    // Lexicographic comparison of ascending qubit lists: the first qubit in
    // which the supports differ belongs to the smaller list.
    const std::uint64_t diff = sa ^ sb;
    const int first = std::countr_zero(diff);
    return (sa >> first) & 1U;
  }
  for (int k = 0; k < a.n; ++k) {
    const char la = a.letter(k);
    const char lb = b.letter(k);
    if (la != lb) return la < lb;
  }
  return false;
}

PauliBasis::PauliBasis(int n, std::vector<PauliString> elements)
    : n_(n), elements_(std::move(elements)) {
  check_qubits(n);
  index_.reserve(elements_.size());
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const PauliString& p = elements_[i];
    if (p.n != n) throw DimensionError("basis element " + p.to_string() + " has wrong qubit count");
    if (p.is_identity()) throw Error("basis may not contain the identity word");
    if (!index_.emplace(p, i).second) throw Error("duplicate basis element " + p.to_string());
  }
}

PauliBasis PauliBasis::full(int n) {
  check_qubits(n);
  if (n > 8) throw DimensionError("full basis limited to n <= 8");
  std::vector<PauliString> all;
  const std::uint64_t m = full_mask(n);
  all.reserve(static_cast<std::size_t>((m + 1) * (m + 1) - 1));
  for (std::uint64_t x = 0; x <= m; ++x) {
    for (std::uint64_t z = 0; z <= m; ++z) {
      if (x == 0 && z == 0) continue;
      all.push_back(PauliString{n, x, z});
    }
  }
  std::sort(all.begin(), all.end(), canonical_less);
  return PauliBasis(n, std::move(all));
}

std::optional<std::size_t> PauliBasis::index_of(const PauliString& p) const {
  const auto it = index_.find(p);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double PauliBasis::normalization() const { return std::pow(2.0, -0.5 * n_); }

std::optional<WordStructure> structure_term(const PauliString& a, const PauliString& b) {
  if (a.commutes_with(b)) return std::nullopt;
  // P_a P_b = phi P_l with phi = +-i, so [P_a, P_b] = 2 phi P_l and
  // [iX_a, iX_b] = -(2 phi / 2^n) P_l = (2 i phi 2^{-n/2}) (iX_l).
  const PhasedPauli prod = multiply(a, b);
  const double sign = prod.phase_exponent == 1 ? -2.0 : 2.0;
  return WordStructure{prod.word, sign * std::pow(2.0, -0.5 * a.n)};
}

std::vector<StructureTerm> commutator_structure(std::size_t j, std::size_t k,
                                                const PauliBasis& basis) {
  if (j >= basis.size() || k >= basis.size()) {
    throw DimensionError("commutator_structure: index out of range");
  }
  const auto term = structure_term(basis[j], basis[k]);
  if (!term) return {};
  const auto target = basis.index_of(term->word);
  if (!target) {
    throw ClosureError("commutator of " + basis[j].to_string() + " and " + basis[k].to_string() +
                       " leaves the basis (" + term->word.to_string() + ")");
  }
  return {StructureTerm{*target, term->coefficient}};
}

Eigen::MatrixXcd dense_matrix(const PauliString& p) {
  if (p.n > 14) throw DimensionError("dense_matrix: too many qubits");
  const std::size_t dim = std::size_t{1} << p.n;
  const std::uint64_t xd = to_dense_bits(p.x_mask, p.n);
  const std::uint64_t zd = to_dense_bits(p.z_mask, p.n);
  const int y_count = std::popcount(p.x_mask & p.z_mask);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                              static_cast<Eigen::Index>(dim));
  for (std::uint64_t c = 0; c < dim; ++c) {
    const int e = y_count + 2 * std::popcount(zd & c);
    m(static_cast<Eigen::Index>(c ^ xd), static_cast<Eigen::Index>(c)) = kIPow[e & 3];
  }
  return m;
}

Eigen::MatrixXcd basis_matrix(const PauliString& p) {
  return dense_matrix(p) * std::pow(2.0, -0.5 * p.n);
}

double hs_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("hs_inner: dimension mismatch");
  }
  return (a.adjoint() * b).trace().real();
}

std::complex<double> trace_with_word(const Eigen::MatrixXcd& op, const PauliString& p) {
  const std::size_t dim = std::size_t{1} << p.n;
  if (op.rows() != static_cast<Eigen::Index>(dim) || op.cols() != op.rows()) {
    throw DimensionError("trace_with_word: operator dimension does not match word");
  }
  const std::uint64_t xd = to_dense_bits(p.x_mask, p.n);
  const std::uint64_t zd = to_dense_bits(p.z_mask, p.n);
  const int y_count = std::popcount(p.x_mask & p.z_mask);
  // P|r> = phase(r) |r ^ x>, so tr(O P) = sum_r O(r, r ^ x) phase(r).
  std::complex<double> acc = 0.0;
  for (std::uint64_t r = 0; r < dim; ++r) {
    const int e = y_count + 2 * std::popcount(zd & r);
    acc += op(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r ^ xd)) * kIPow[e & 3];
  }
  return acc;
}

double expectation(const Eigen::VectorXcd& psi, const PauliString& p) {
  const std::size_t dim = std::size_t{1} << p.n;
  if (psi.size() != static_cast<Eigen::Index>(dim)) {
    throw DimensionError("expectation: state dimension does not match word");
  }
  const std::uint64_t xd = to_dense_bits(p.x_mask, p.n);
  const std::uint64_t zd = to_dense_bits(p.z_mask, p.n);
  const int y_count = std::popcount(p.x_mask & p.z_mask);
  std::complex<double> acc = 0.0;
  for (std::uint64_t r = 0; r < dim; ++r) {
    const int e = y_count + 2 * std::popcount(zd & r);
    acc += std::conj(psi(static_cast<Eigen::Index>(r ^ xd))) * kIPow[e & 3] *
           psi(static_cast<Eigen::Index>(r));
  }
  return acc.real();
}

ObservableExpansion expand_observable(const Eigen::MatrixXcd& op, const PauliBasis& basis,
                                      double tol) {
  const int n = basis.qubits();
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (op.rows() != dim || op.cols() != dim) {
    throw DimensionError("expand_observable: operator is not 2^n x 2^n");
  }
  const double scale = std::max(1.0, op.norm());
  if ((op - op.adjoint()).norm() > tol * scale) {
    throw Error("expand_observable: operator is not Hermitian");
  }
  const double norm = basis.normalization();
  ObservableExpansion out;
  out.identity = op.trace().real() * norm;
  double captured = out.identity * out.identity;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const double o = trace_with_word(op, basis[j]).real() * norm;
    if (std::abs(o) > tol * scale) {
      out.terms.emplace_back(j, o);
      captured += o * o;
    }
  }
  // Orthonormality: ||O||_F^2 = sum of squared coefficients when the basis spans O.
  const double total = op.squaredNorm();
  if (std::abs(total - captured) > tol * scale * scale * 10.0) {
    throw Error("expand_observable: operator has components outside the basis");
  }
  return out;
}

}  // namespace hamid
