#include "hamid/solver.hpp"

#include "hamid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace hamid {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Eigen::MatrixXd finite_difference_jacobian(const CoefficientResidual& f, std::span<const double> theta) {
  const Eigen::VectorXd r0 = f(theta);
  Eigen::MatrixXd jac(r0.size(), static_cast<Eigen::Index>(theta.size()));
  std::vector<double> probe(theta.begin(), theta.end());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(theta[i]));
    probe[i] = theta[i] + h;
    jac.col(static_cast<Eigen::Index>(i)) = (f(probe) - r0) / h;
    probe[i] = theta[i];
  }
  return jac;
}

LmResult levenberg_marquardt(const CoefficientResidual& f, std::vector<double> theta0,
                             std::size_t max_iterations, double tol_residual, double divergence_bound) {
  LmResult out;
  out.theta = std::move(theta0);
  const auto np = static_cast<Eigen::Index>(out.theta.size());
  Eigen::VectorXd r = f(out.theta);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  std::vector<double> trial(out.theta.size());

  for (std::size_t it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    if (std::sqrt(cost) <= 1e-3 * tol_residual) break;
    const Eigen::MatrixXd jac = finite_difference_jacobian(f, out.theta);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.cwiseAbs().maxCoeff() <= 1e-300) break;
    const Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12);

    bool accepted = false;
    Eigen::VectorXd step;
    while (lambda < 1e12) {
      Eigen::MatrixXd aug = jtj;
      aug.diagonal() += lambda * diag;
      step = aug.ldlt().solve(-grad);
      for (Eigen::Index i = 0; i < np; ++i) trial[static_cast<std::size_t>(i)] = out.theta[static_cast<std::size_t>(i)] + step(i);
      const Eigen::VectorXd r_trial = f(trial);
      const double trial_cost = r_trial.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        out.theta = trial;
        r = r_trial;
        cost = trial_cost;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!accepted) break;
    double theta_norm = 0.0;
    for (double v : out.theta) theta_norm = std::max(theta_norm, std::abs(v));
    if (theta_norm > divergence_bound) break;
    if (step.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + theta_norm)) break;
  }
  out.residual_norm = std::sqrt(cost);
  out.converged = out.residual_norm <= tol_residual;
  return out;
}

double spectral_box_bound(std::span<const StateTarget> targets) {
  double bound = 0.0;
  for (const StateTarget& t : targets) {
    const auto k = static_cast<Eigen::Index>(t.target.order());
    if (k == 0) continue;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 1; i < k; ++i) companion(i, i - 1) = 1.0;
    companion.col(k - 1) = -t.target.den;
    bound = std::max(bound, companion.eigenvalues().cwiseAbs().maxCoeff());
  }
  return bound;
}

void classify_equivalents(std::vector<ParameterEstimate>& estimates, const CoefficientResidual& f,
                          double tol) {
  std::vector<Eigen::VectorXd> coeffs;
  coeffs.reserve(estimates.size());
  for (const ParameterEstimate& e : estimates) coeffs.push_back(f.model_values(e.theta));
  const Eigen::VectorXd& w = f.weights();

  int next = 0;
  std::vector<std::size_t> reps;  // first member of each class
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    estimates[i].class_id = -1;
    for (std::size_t c = 0; c < reps.size(); ++c) {
      const double d = (coeffs[i] - coeffs[reps[c]]).cwiseProduct(w).cwiseAbs().maxCoeff();
      if (d <= tol) {
        estimates[i].class_id = static_cast<int>(c);
        break;
      }
    }
    if (estimates[i].class_id < 0) {
      estimates[i].class_id = next++;
      reps.push_back(i);
    }
  }
}

namespace {

bool theta_close(const std::vector<double>& a, const std::vector<double>& b, double tol, bool absolute_values) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = absolute_values ? std::abs(a[i]) : a[i];
    const double y = absolute_values ? std::abs(b[i]) : b[i];
    if (std::abs(x - y) > tol * std::max(1.0, std::max(std::abs(x), std::abs(y)))) return false;
  }
  return true;
}

}  // namespace

SolveReport solve_residual(const CoefficientResidual& f, const std::vector<std::string>& names,
                           const SolveConfig& cfg) {
  if (cfg.starts == 0) throw Error("solve: starts must be at least 1");
  if (!(cfg.tol_residual > 0.0) || !(cfg.tol_cluster > 0.0) || !(cfg.tol_class > 0.0)) {
    throw Error("solve: tolerances must be positive");
  }
  const std::size_t np = f.parameters();
  SolveReport rep;
  rep.parameter_names = names;
  rep.starts = cfg.starts;
  for (const Equation& e : f.equation_list()) rep.equation_labels.push_back(e.label);

  if (f.equations() == 0 || np == 0) {
    rep.insensitive = true;
    rep.diagnostics.push_back(
        "the coefficient equations do not depend on any unknown parameter: the output is insensitive "
        "to the parameters for this initial state (zero or stationary coherence vector)");
    return rep;
  }

  std::vector<std::pair<double, double>> box = cfg.box;
  if (box.empty()) {
    double b = cfg.box_bound;
    if (!(b > 0.0)) b = spectral_box_bound(f.targets());
    if (!(b > 0.0)) b = 1.0;
    box.assign(np, {-b, b});
  }
  if (box.size() != np) throw DimensionError("solve: box size differs from parameter count");
  double box_scale = 1.0;
  for (const auto& [lo, hi] : box) box_scale = std::max({box_scale, std::abs(lo), std::abs(hi)});

  auto run_start = [&](std::size_t i) {
    std::mt19937_64 rng(mix_seed(cfg.seed, i));
    std::vector<double> theta0(np);
    for (std::size_t k = 0; k < np; ++k) {
      std::uniform_real_distribution<double> u(box[k].first, box[k].second);
      theta0[k] = u(rng);
    }
    return levenberg_marquardt(f, std::move(theta0), cfg.max_iterations, cfg.tol_residual, 100.0 * box_scale);
  };

  std::vector<LmResult> runs(cfg.starts);
  if (cfg.execution == Execution::parallel) {
    const auto count = static_cast<long long>(cfg.starts);
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) runs[static_cast<std::size_t>(i)] = run_start(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < cfg.starts; ++i) runs[i] = run_start(i);
  }

  // Deterministic merge: residual first, then lexicographic theta.
  std::sort(runs.begin(), runs.end(), [](const LmResult& a, const LmResult& b) {
    if (a.residual_norm != b.residual_norm) return a.residual_norm < b.residual_norm;
    return a.theta < b.theta;
  });
  rep.best_residual = runs.front().residual_norm;
  rep.best_theta = runs.front().theta;

  for (const LmResult& run : runs) {
    if (!run.converged) continue;
    ++rep.converged_starts;
    const bool duplicate = std::any_of(rep.estimates.begin(), rep.estimates.end(), [&](const ParameterEstimate& e) {
      return theta_close(e.theta, run.theta, cfg.tol_cluster, false);
    });
    if (duplicate) continue;
    ParameterEstimate est;
    est.theta = run.theta;
    est.residual_norm = f(run.theta).norm();
    est.converged = true;
    est.iterations = run.iterations;
    rep.estimates.push_back(std::move(est));
  }

  const Eigen::MatrixXd jac = finite_difference_jacobian(f, rep.best_theta);
  const Eigen::VectorXd sv = jac.jacobiSvd().singularValues();
  rep.jacobian_condition = (sv.size() == static_cast<Eigen::Index>(np) && sv(0) > 0.0) ? sv(sv.size() - 1) / sv(0) : 0.0;
  if (f.equations() < np || rep.jacobian_condition <= 1e-8) {
    rep.insensitive = true;
    std::ostringstream msg;
    msg << "singular Jacobian at the best point (sigma_min/sigma_max = " << rep.jacobian_condition
        << "): some parameter combinations do not affect the output for this initial state";
    rep.diagnostics.push_back(msg.str());
  }

  if (rep.estimates.empty()) {
    std::ostringstream msg;
    msg << "no start reached the residual tolerance " << cfg.tol_residual << "; best residual "
        << rep.best_residual;
    rep.diagnostics.push_back(msg.str());
    return rep;
  }

  classify_equivalents(rep.estimates, f, cfg.tol_class);
  int max_class = -1;
  for (const auto& e : rep.estimates) max_class = std::max(max_class, e.class_id);
  rep.class_count = static_cast<std::size_t>(max_class + 1);
  for (int c = 0; c <= max_class; ++c) {
    const ParameterEstimate* first = nullptr;
    for (const auto& e : rep.estimates) {
      if (e.class_id != c) continue;
      if (first == nullptr) {
        first = &e;
      } else if (!theta_close(first->theta, e.theta, cfg.tol_cluster, true)) {
        rep.flagged_classes.push_back(c);
        break;
      }
    }
  }
  if (rep.estimates.size() > 1) rep.diagnostics.push_back(ambiguity_caveat());
  return rep;
}

SolveReport solve(const HamiltonianModel& model, const TransferFunction& target,
                  const CoherenceSystem& sys_template, const SolveConfig& cfg) {
  return multi_state_solve(model, {StateTarget{target, sys_template, "state0"}}, cfg);
}

SolveReport multi_state_solve(const HamiltonianModel& model, std::vector<StateTarget> targets,
                              const SolveConfig& cfg) {
  if (targets.empty()) throw Error("multi_state_solve: at least one target is required");
  const CoefficientResidual f(model, std::move(targets), cfg.residual);
  return solve_residual(f, model.parameter_names(), cfg);
}

std::string ambiguity_caveat() {
  return "More than one parameter set reproduces the measured transfer function; they are "
         "indistinguishable from this observable and initial state. Choosing among them needs an "
         "extra observable, another initial state, or prior knowledge such as coupling signs.";
}

}  // namespace hamid
