#pragma once

// Sparse algebra of n-qubit Pauli words.
//
// A word is stored as two bit masks: bit k of x_mask / z_mask marks an X / Z
// factor on qubit k, and a qubit with both bits set carries Y. Qubit 0 is the
// leftmost character of the text form and the most significant tensor factor
// of the dense matrix.
//
// The su(N) basis element attached to a word P is X = P / 2^{n/2}, which makes
// the basis orthonormal under tr(A^dagger B).

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hamid {

inline constexpr int kMaxQubits = 32;

struct PauliString {
  int n = 1;
  std::uint64_t x_mask = 0;
  std::uint64_t z_mask = 0;

  static PauliString identity(int n);
  // Single-qubit factor `letter` in {I, X, Y, Z} on `qubit`.
  static PauliString single(int n, int qubit, char letter);
  // Parses "XZI"-style text; qubit 0 is leftmost.
  static PauliString parse(std::string_view word);

  char letter(int qubit) const;
  int weight() const;
  bool is_identity() const { return x_mask == 0 && z_mask == 0; }
  bool commutes_with(const PauliString& other) const;
  std::string to_string() const;

  friend bool operator==(const PauliString&, const PauliString&) = default;
};

struct PauliStringHash {
  std::size_t operator()(const PauliString& p) const noexcept {
    std::uint64_t h = p.x_mask * 0x9E3779B97F4A7C15ULL;
    h ^= p.z_mask + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h ^ static_cast<std::uint64_t>(p.n));
  }
};

// phase = i^phase_exponent.
struct PhasedPauli {
  int phase_exponent = 0;
  PauliString word;

  std::complex<double> phase() const;
};

// (word a)(word b) = phase * product. Throws DimensionError on mismatched n.
PhasedPauli multiply(const PauliString& a, const PauliString& b);

// Ordering by (weight, qubit support, letters with X < Y < Z).
bool canonical_less(const PauliString& a, const PauliString& b);

// Ordered list of distinct non-identity words on a common qubit count.
class PauliBasis {
 public:
  PauliBasis() = default;
  PauliBasis(int n, std::vector<PauliString> elements);

  // All 4^n - 1 non-identity words in canonical order.
  static PauliBasis full(int n);

  int qubits() const { return n_; }
  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }
  const PauliString& operator[](std::size_t i) const { return elements_[i]; }
  const std::vector<PauliString>& elements() const { return elements_; }
  std::optional<std::size_t> index_of(const PauliString& p) const;
  bool contains(const PauliString& p) const { return index_of(p).has_value(); }

  // 2^{-n/2}, the factor turning a word into an orthonormal basis element.
  double normalization() const;

 private:
  int n_ = 0;
  std::vector<PauliString> elements_;
  std::unordered_map<PauliString, std::size_t, PauliStringHash> index_;
};

struct StructureTerm {
  std::size_t target = 0;
  double coefficient = 0.0;
};

// Structure constant of two normalized basis elements as a function of their
// words: [iX_a, iX_b] = coefficient * (iX_word). Empty when the words commute.
struct WordStructure {
  PauliString word;
  double coefficient = 0.0;
};
std::optional<WordStructure> structure_term(const PauliString& a, const PauliString& b);

// [iX_j, iX_k] = sum_l C_jkl (iX_l) for the normalized basis. A pair of Pauli
// words either commutes (empty result) or yields exactly one term.
// Throws ClosureError when the product word is not in `basis`.
std::vector<StructureTerm> commutator_structure(std::size_t j, std::size_t k,
                                                const PauliBasis& basis);

// Dense 2^n x 2^n matrix of the raw word (no normalization).
Eigen::MatrixXcd dense_matrix(const PauliString& p);
// Dense matrix of the normalized basis element.
Eigen::MatrixXcd basis_matrix(const PauliString& p);

// tr(A^dagger B); the real part is returned, exact for Hermitian inputs.
double hs_inner(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// tr(O P) for a raw word, in O(2^n) without forming P.
std::complex<double> trace_with_word(const Eigen::MatrixXcd& op, const PauliString& p);

// <psi|P|psi> for a raw word; real for Hermitian P.
double expectation(const Eigen::VectorXcd& psi, const PauliString& p);

struct ObservableExpansion {
  double identity = 0.0;  // coefficient on I / 2^{n/2}
  std::vector<std::pair<std::size_t, double>> terms;  // (basis index, o_j)
};

// O = identity * I/2^{n/2} + sum_j o_j X_j over `basis`. Throws on a
// non-Hermitian input or when O has weight outside the basis.
ObservableExpansion expand_observable(const Eigen::MatrixXcd& op, const PauliBasis& basis,
                                      double tol = 1e-10);

}  // namespace hamid
