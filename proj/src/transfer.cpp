#include "hamid/transfer.hpp"

#include "hamid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace hamid {

namespace {

// Kahan-compensated trace of a * b.
double trace_of_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double sum = 0.0;
  double carry = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double term = a.row(i).dot(b.col(i)) - carry;
    const double next = sum + term;
    carry = (next - sum) - term;
    sum = next;
  }
  return sum;
}

std::complex<double> horner(const Eigen::VectorXd& coeff, std::complex<double> s) {
  std::complex<double> acc = 0.0;
  for (Eigen::Index i = coeff.size() - 1; i >= 0; --i) acc = acc * s + coeff(i);
  return acc;
}

// Roots of sum_i coeff[i] s^i with coeff[degree] != 0.
std::vector<std::complex<double>> poly_roots(const Eigen::VectorXd& coeff) {
  const Eigen::Index d = coeff.size() - 1;
  if (d <= 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) companion(i, d - 1) = -coeff(i) / coeff(d);
  const Eigen::VectorXcd ev = companion.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

// Real coefficients of prod (s - r), lowest power first; includes the leading 1.
Eigen::VectorXd poly_from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i + 1] += c[i];
      next[i] -= r * c[i];
    }
    c = std::move(next);
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) out(static_cast<Eigen::Index>(i)) = c[i].real();
  return out;
}

}  // namespace

std::complex<double> TransferFunction::den_at(std::complex<double> s) const {
  return horner(den, s) + std::pow(s, static_cast<int>(den.size()));
}

std::complex<double> TransferFunction::num_at(std::complex<double> s, std::size_t channel) const {
  return horner(num.at(channel), s);
}

TransferFunction transfer_coefficients(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c,
                                       const Eigen::VectorXd& x0) {
  const Eigen::Index k = a.rows();
  if (a.cols() != k || c.cols() != k || x0.size() != k) {
    throw DimensionError("transfer_coefficients: A, C and x0 dimensions disagree");
  }
  TransferFunction tf;
  tf.den = Eigen::VectorXd::Zero(k);
  tf.num.assign(static_cast<std::size_t>(c.rows()), Eigen::VectorXd::Zero(k));
  if (k == 0) return tf;

  // adj(sI - A) = sum_{j=1..K} M_j s^{K-j},  M_1 = I,
  // M_j = A M_{j-1} + p_{K-j+1} I,  p_{K-j} = -tr(A M_j) / j.
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index j = 1; j <= k; ++j) {
    if (j > 1) {
      m = (a * m).eval();
      m.diagonal().array() += tf.den(k - j + 1);
    }
    const Eigen::VectorXd mx = m * x0;
    for (std::size_t ch = 0; ch < tf.num.size(); ++ch) {
      tf.num[ch](k - j) = c.row(static_cast<Eigen::Index>(ch)).dot(mx);
    }
    tf.den(k - j) = -trace_of_product(a, m) / static_cast<double>(j);
  }
  return tf;
}

TransferFunction reduce_common_factors(const TransferFunction& tf, double rel_tol) {
  const std::size_t order = tf.order();
  Eigen::VectorXd p_full(static_cast<Eigen::Index>(order + 1));
  p_full.head(static_cast<Eigen::Index>(order)) = tf.den;
  p_full(static_cast<Eigen::Index>(order)) = 1.0;
  std::vector<std::complex<double>> p_roots = poly_roots(p_full);

  struct ChannelRoots {
    bool zero = true;
    double lead = 0.0;
    std::vector<std::complex<double>> roots;
  };
  std::vector<ChannelRoots> ch(tf.channels());
  for (std::size_t c = 0; c < tf.channels(); ++c) {
    const Eigen::VectorXd& q = tf.num[c];
    const double scale = q.size() ? q.cwiseAbs().maxCoeff() : 0.0;
    if (scale == 0.0) continue;
    Eigen::Index deg = q.size() - 1;
    while (deg > 0 && std::abs(q(deg)) <= 1e-12 * scale) --deg;
    ch[c].zero = false;
    ch[c].lead = q(deg);
    ch[c].roots = poly_roots(q.head(deg + 1));
  }

  const bool all_zero = std::all_of(ch.begin(), ch.end(), [](const ChannelRoots& r) { return r.zero; });
  TransferFunction out;
  if (all_zero) {
    out.den = Eigen::VectorXd::Zero(0);
    out.num.assign(tf.channels(), Eigen::VectorXd::Zero(0));
    return out;
  }

  std::vector<std::complex<double>> kept;
  for (const auto& z : p_roots) {
    std::vector<std::size_t> match(ch.size(), 0);
    bool common = true;
    for (std::size_t c = 0; c < ch.size() && common; ++c) {
      if (ch[c].zero) continue;
      common = false;
      for (std::size_t i = 0; i < ch[c].roots.size(); ++i) {
        if (std::abs(ch[c].roots[i] - z) <= rel_tol * (1.0 + std::abs(z))) {
          match[c] = i;
          common = true;
          break;
        }
      }
    }
    if (!common) {
      kept.push_back(z);
      continue;
    }
    for (std::size_t c = 0; c < ch.size(); ++c) {
      if (!ch[c].zero) ch[c].roots.erase(ch[c].roots.begin() + static_cast<std::ptrdiff_t>(match[c]));
    }
  }

  const Eigen::VectorXd p_new = poly_from_roots(kept);
  const auto new_order = static_cast<Eigen::Index>(kept.size());
  out.den = p_new.head(new_order);
  out.num.assign(tf.channels(), Eigen::VectorXd::Zero(new_order));
  for (std::size_t c = 0; c < ch.size(); ++c) {
    if (ch[c].zero) continue;
    const Eigen::VectorXd q = ch[c].lead * poly_from_roots(ch[c].roots);
    out.num[c].head(std::min<Eigen::Index>(q.size(), new_order)) = q.head(std::min<Eigen::Index>(q.size(), new_order));
  }
  return out;
}

TransferFunction model_coefficients(const HamiltonianModel& model, std::span<const double> theta,
                                    const CoherenceSystem& sys_template) {
  const Eigen::MatrixXd a = build_generator(model, theta, sys_template.accessible);
  return transfer_coefficients(a, sys_template.selector, sys_template.x0);
}

namespace {

std::string equation_label(const Equation& e, std::size_t states, std::size_t channels) {
  std::ostringstream os;
  os << (e.is_numerator ? 'q' : 'p') << e.power;
  if (e.is_numerator && channels > 1) os << "[ch" << e.channel << ']';
  if (states > 1) os << "@state" << e.state;
  return os.str();
}

double coefficient_of(const TransferFunction& tf, const Equation& e) {
  if (e.is_numerator) return tf.num[e.channel](static_cast<Eigen::Index>(e.power));
  return tf.den(static_cast<Eigen::Index>(e.power));
}

}  // namespace

CoefficientResidual::CoefficientResidual(const HamiltonianModel& model, std::vector<StateTarget> targets,
                                         ResidualOptions opts)
    : parameter_count_(model.parameter_count()), targets_(std::move(targets)) {
  if (targets_.empty()) throw Error("coefficient residual needs at least one target");
  const int n = targets_.front().system.accessible.qubits();
  for (const StateTarget& t : targets_) {
    if (t.system.accessible.qubits() != n || t.system.accessible.elements() != targets_.front().system.accessible.elements()) {
      throw Error("targets use inconsistent accessible sets");
    }
  }

  // Random parameter samples for structural tests.
  std::mt19937_64 rng(0x5EEDF00DULL);
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::bernoulli_distribution sign(0.5);
  constexpr int kSamples = 3;
  std::vector<std::vector<double>> samples(kSamples, std::vector<double>(parameter_count_));
  for (auto& s : samples) {
    for (double& v : s) v = mag(rng) * (sign(rng) ? 1.0 : -1.0);
  }

  std::vector<bool> zero_target(targets_.size(), false);
  for (std::size_t si = 0; si < targets_.size(); ++si) {
    StateTarget& t = targets_[si];
    const std::size_t k = t.system.order();
    generators_.push_back(linear_generator(model, t.system.accessible));
    if (t.target.channels() != t.system.outputs()) {
      throw DimensionError("target channel count differs from the observable count");
    }
    double den_scale = 1.0;
    for (Eigen::Index i = 0; i < t.target.den.size(); ++i) den_scale = std::max(den_scale, std::abs(t.target.den(i)));
    double num_scale = 0.0;
    for (const auto& q : t.target.num) {
      if (q.size()) num_scale = std::max(num_scale, q.cwiseAbs().maxCoeff());
    }
    zero_target[si] = num_scale <= 1e-12 * den_scale;

    bool reduce = false;
    if (!zero_target[si] && t.target.order() != k) {
      bool reducible = t.target.order() < k;
      for (const auto& s : samples) {
        if (!reducible) break;
        const TransferFunction tf = transfer_coefficients(generators_.back().at(s), t.system.selector, t.system.x0);
        reducible = reduce_common_factors(tf).order() == t.target.order();
      }
      if (!reducible) {
        std::ostringstream msg;
        msg << "realization order " << t.target.order() << " differs from the model's accessible dimension " << k
            << ". An order below K means the measured data see fewer modes than the model predicts "
               "(lost controllability/observability, e.g. a zero coupling); an order above K means the "
               "model is missing terms or the truncation epsilon is too small.";
        throw StructuralMismatchError(msg.str());
      }
      reduce = true;
    }
    reduce_.push_back(reduce);
  }

  // Sample the model at the random points to find structural zeros and
  // parameter-independent coefficients.
  std::vector<std::vector<TransferFunction>> sampled;
  for (const auto& s : samples) {
    bool ok = true;
    sampled.push_back(model_transfer(s, &ok));
    if (!ok) throw StructuralMismatchError("model transfer function could not be reduced to the target order");
  }

  struct Candidate {
    Equation eq;
    bool constant = false;
  };
  std::vector<Candidate> candidates;
  for (std::size_t si = 0; si < targets_.size(); ++si) {
    const StateTarget& t = targets_[si];
    const std::size_t order = zero_target[si] ? t.system.order() : t.target.order();
    std::vector<Equation> eqs;
    for (std::size_t c = 0; c < t.target.channels(); ++c) {
      for (std::size_t i = 0; i < order; ++i) eqs.push_back(Equation{si, true, c, i, order - 1 - i, {}});
    }
    if (!zero_target[si]) {
      for (std::size_t i = 0; i < order; ++i) eqs.push_back(Equation{si, false, 0, i, order - i, {}});
    }
    for (Equation& e : eqs) {
      bool zero = true;
      bool constant = true;
      const double first = coefficient_of(sampled[0][si], e);
      for (const auto& tfs : sampled) {
        const TransferFunction& tf = tfs[si];
        double scale = 1.0;
        for (Eigen::Index i = 0; i < tf.den.size(); ++i) scale = std::max(scale, std::abs(tf.den(i)));
        for (const auto& q : tf.num) {
          if (q.size()) scale = std::max(scale, q.cwiseAbs().maxCoeff());
        }
        const double v = coefficient_of(tf, e);
        if (std::abs(v) > 1e-11 * scale) zero = false;
        if (std::abs(v - first) > 1e-12 * scale) constant = false;
      }
      if (zero) continue;
      candidates.push_back(Candidate{e, constant});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.eq.degree != b.eq.degree) return a.eq.degree < b.eq.degree;
    if (a.eq.is_numerator != b.eq.is_numerator) return a.eq.is_numerator;
    if (a.eq.state != b.eq.state) return a.eq.state < b.eq.state;
    return a.eq.channel < b.eq.channel;
  });

  for (const Candidate& c : candidates) {
    if (opts.lowest_order_only) {
      if (c.constant) continue;
      if (equations_.size() == parameter_count_) break;
    }
    Equation e = c.eq;
    e.label = equation_label(e, targets_.size(), targets_[e.state].target.channels());
    equations_.push_back(std::move(e));
  }

  target_.resize(static_cast<Eigen::Index>(equations_.size()));
  weights_.resize(static_cast<Eigen::Index>(equations_.size()));
  for (std::size_t i = 0; i < equations_.size(); ++i) {
    const Equation& e = equations_[i];
    const TransferFunction& tf = targets_[e.state].target;
    const double v = (e.is_numerator && zero_target[e.state]) ? 0.0 : coefficient_of(tf, e);
    target_(static_cast<Eigen::Index>(i)) = v;
    weights_(static_cast<Eigen::Index>(i)) = opts.weighted ? 1.0 / std::max(1.0, std::abs(v)) : 1.0;
  }
}

std::vector<TransferFunction> CoefficientResidual::model_transfer(std::span<const double> theta, bool* ok) const {
  std::vector<TransferFunction> out;
  out.reserve(targets_.size());
  *ok = true;
  for (std::size_t si = 0; si < targets_.size(); ++si) {
    const StateTarget& t = targets_[si];
    TransferFunction tf = transfer_coefficients(generators_[si].at(theta), t.system.selector, t.system.x0);
    if (reduce_[si]) {
      tf = reduce_common_factors(tf);
      if (tf.order() != t.target.order()) *ok = false;
    }
    out.push_back(std::move(tf));
  }
  return out;
}

Eigen::VectorXd CoefficientResidual::model_values(std::span<const double> theta) const {
  bool ok = true;
  const std::vector<TransferFunction> tfs = model_transfer(theta, &ok);
  Eigen::VectorXd v(static_cast<Eigen::Index>(equations_.size()));
  for (std::size_t i = 0; i < equations_.size(); ++i) {
    const Equation& e = equations_[i];
    const auto idx = static_cast<Eigen::Index>(i);
    if (!ok) {
      // Reduction lost or gained a root: push the point far from any solution.
      v(idx) = target_(idx) + 1e6 / weights_(idx);
    } else {
      v(idx) = coefficient_of(tfs[e.state], e);
    }
  }
  return v;
}

Eigen::VectorXd CoefficientResidual::operator()(std::span<const double> theta) const {
  return (model_values(theta) - target_).cwiseProduct(weights_);
}

Eigen::VectorXd coefficient_residual(const HamiltonianModel& model, std::span<const double> theta,
                                     const TransferFunction& target, const CoherenceSystem& sys_template,
                                     ResidualOptions opts) {
  const CoefficientResidual res(model, {StateTarget{target, sys_template, "state0"}}, opts);
  return res(theta);
}

}  // namespace hamid
