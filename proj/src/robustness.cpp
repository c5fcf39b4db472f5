#include "hamid/robustness.hpp"

#include "hamid/errors.hpp"
#include "hamid/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace hamid {

using nlohmann::json;

std::vector<bool> sign_ambiguous_parameters(const Experiment& experiment, const std::vector<double>& theta) {
  const CoherenceSystem sys = experiment.system();
  const TransferFunction base = model_coefficients(experiment.model, theta, sys);
  auto same = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() <= 1e-9 * scale;
  };
  std::vector<bool> out(theta.size(), false);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (theta[i] == 0.0) continue;
    std::vector<double> flipped = theta;
    flipped[i] = -flipped[i];
    const TransferFunction tf = model_coefficients(experiment.model, flipped, sys);
    bool equal = same(base.den, tf.den);
    for (std::size_t c = 0; equal && c < base.num.size(); ++c) equal = same(base.num[c], tf.num[c]);
    out[i] = equal;
  }
  return out;
}

std::vector<double> truth_class_estimate(const SolveReport& report, const std::vector<double>& truth,
                                         const std::vector<bool>& sign_ambiguous) {
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const ParameterEstimate& e : report.estimates) {
    std::vector<double> theta = e.theta;
    double dist = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      if (sign_ambiguous[i]) theta[i] = std::copysign(std::abs(theta[i]), truth[i]);
      dist = std::max(dist, std::abs(theta[i] - truth[i]) / std::max(std::abs(truth[i]), 1e-300));
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = std::move(theta);
    }
  }
  return best;
}

double quantile(std::vector<double> values, double level) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = level * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

CellStats cell_statistics(const std::vector<double>& values, double truth) {
  CellStats c;
  c.count = values.size();
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    c.mean = c.rel_error_mean_pct = c.std = c.rel_error_std_pct = nan;
    c.quantiles.fill(nan);
    c.rel_error_quantiles_pct.fill(nan);
    return c;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  c.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - c.mean) * (v - c.mean);
  c.std = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  c.rel_error_mean_pct = (c.mean - truth) / truth * 100.0;
  c.rel_error_std_pct = c.std / std::abs(truth) * 100.0;
  std::vector<double> rel(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) rel[i] = (values[i] - truth) / truth * 100.0;
  for (std::size_t q = 0; q < kQuantileLevels.size(); ++q) {
    c.quantiles[q] = quantile(values, kQuantileLevels[q]);
    c.rel_error_quantiles_pct[q] = quantile(rel, kQuantileLevels[q]);
  }
  return c;
}

RobustnessReport run_robustness(const Experiment& experiment, const RobustnessConfig& cfg) {
  if (!experiment.has_nominal()) throw Error("robustness study needs nominal (true) parameter values");
  if (cfg.sigmas.empty()) throw Error("robustness study needs at least one sigma");
  if (cfg.trajectories < 1) throw Error("robustness study needs at least one trajectory");
  for (double s : cfg.sigmas) {
    if (!(s >= 0.0)) throw Error("noise sigma must be nonnegative");
  }

  RobustnessReport rep;
  rep.parameter_names = experiment.model.parameter_names();
  rep.truth = experiment.nominal;
  rep.sign_ambiguous = sign_ambiguous_parameters(experiment, rep.truth);
  rep.trajectories = cfg.trajectories;
  rep.seed = cfg.seed;

  const CoherenceSystem sys = experiment.system();
  TimeTrace clean = simulate_trace(sys, cfg.dt, samples_for_duration(cfg.duration, cfg.dt));
  clean.initial_state_label = experiment.initial_state.label;

  IdentifyOptions base = cfg.identify;
  base.solve.execution = Execution::serial;
  if (cfg.fix_order) base.era.order = sys.order();

  const std::size_t np = rep.truth.size();
  for (std::size_t si = 0; si < cfg.sigmas.size(); ++si) {
    const double sigma = cfg.sigmas[si];
    SigmaResult res;
    res.sigma = sigma;
    res.estimates.assign(cfg.trajectories, {});

    auto run_one = [&](std::size_t t) {
      const std::uint64_t seed = mix_seed(mix_seed(cfg.seed, si), t);
      const TimeTrace trace = sigma > 0.0 ? add_noise(clean, sigma, seed) : clean;
      IdentifyOptions opts = base;
      opts.solve.seed = seed;
      try {
        const IdentifyResult r = identify(experiment, trace, opts);
        return truth_class_estimate(r.report, rep.truth, rep.sign_ambiguous);
      } catch (const Error&) {
        return std::vector<double>{};
      }
    };

    if (cfg.execution == Execution::parallel) {
      const auto count = static_cast<long long>(cfg.trajectories);
#pragma omp parallel for schedule(dynamic)
      for (long long t = 0; t < count; ++t) res.estimates[static_cast<std::size_t>(t)] = run_one(static_cast<std::size_t>(t));
    } else {
      for (std::size_t t = 0; t < cfg.trajectories; ++t) res.estimates[t] = run_one(t);
    }

    std::vector<std::vector<double>> columns(np);
    for (const auto& est : res.estimates) {
      if (est.empty()) {
        ++res.dropped;
        continue;
      }
      ++res.converged;
      for (std::size_t i = 0; i < np; ++i) columns[i].push_back(est[i]);
    }
    for (std::size_t i = 0; i < np; ++i) res.cells.push_back(cell_statistics(columns[i], rep.truth[i]));
    rep.results.push_back(std::move(res));
  }
  return rep;
}

void write_mean_error_csv(std::ostream& os, const RobustnessReport& rep) {
  os << "sigma,parameter,truth,mean,rel_error_mean_pct\n";
  for (const SigmaResult& r : rep.results) {
    for (std::size_t i = 0; i < rep.parameter_names.size(); ++i) {
      os << format_double(r.sigma) << ',' << rep.parameter_names[i] << ',' << format_double(rep.truth[i]) << ','
         << format_double(r.cells[i].mean) << ',' << format_double(r.cells[i].rel_error_mean_pct) << '\n';
    }
  }
}

void write_spread_csv(std::ostream& os, const RobustnessReport& rep) {
  os << "sigma,parameter,std,rel_error_std_pct\n";
  for (const SigmaResult& r : rep.results) {
    for (std::size_t i = 0; i < rep.parameter_names.size(); ++i) {
      os << format_double(r.sigma) << ',' << rep.parameter_names[i] << ',' << format_double(r.cells[i].std) << ','
         << format_double(r.cells[i].rel_error_std_pct) << '\n';
    }
  }
}

void write_boxplot_csv(std::ostream& os, const RobustnessReport& rep) {
  os << "sigma,parameter,count,q09,q25,q50,q75,q91,rel_q09,rel_q25,rel_q50,rel_q75,rel_q91\n";
  for (const SigmaResult& r : rep.results) {
    for (std::size_t i = 0; i < rep.parameter_names.size(); ++i) {
      const CellStats& c = r.cells[i];
      os << format_double(r.sigma) << ',' << rep.parameter_names[i] << ',' << c.count;
      for (double q : c.quantiles) os << ',' << format_double(q);
      for (double q : c.rel_error_quantiles_pct) os << ',' << format_double(q);
      os << '\n';
    }
  }
}

void write_estimates_csv(std::ostream& os, const RobustnessReport& rep) {
  os << "sigma,trajectory";
  for (const auto& name : rep.parameter_names) os << ',' << name;
  os << '\n';
  for (const SigmaResult& r : rep.results) {
    for (std::size_t t = 0; t < r.estimates.size(); ++t) {
      if (r.estimates[t].empty()) continue;
      os << format_double(r.sigma) << ',' << t;
      for (double v : r.estimates[t]) os << ',' << format_double(v);
      os << '\n';
    }
  }
}

std::string robustness_summary_json(const RobustnessReport& rep) {
  json j;
  j["parameters"] = rep.parameter_names;
  j["truth"] = rep.truth;
  j["sign_ambiguous"] = rep.sign_ambiguous;
  j["trajectories"] = rep.trajectories;
  j["seed"] = rep.seed;
  json levels = json::array();
  for (const SigmaResult& r : rep.results) {
    json jl;
    jl["sigma"] = r.sigma;
    jl["converged"] = r.converged;
    jl["dropped"] = r.dropped;
    jl["dropout_rate"] = static_cast<double>(r.dropped) / static_cast<double>(std::max<std::size_t>(1, rep.trajectories));
    json cells = json::object();
    for (std::size_t i = 0; i < rep.parameter_names.size(); ++i) {
      const CellStats& c = r.cells[i];
      cells[rep.parameter_names[i]] = {{"mean", c.mean},
                                       {"rel_error_mean_pct", c.rel_error_mean_pct},
                                       {"std", c.std},
                                       {"rel_error_std_pct", c.rel_error_std_pct},
                                       {"quantiles", c.quantiles},
                                       {"rel_error_quantiles_pct", c.rel_error_quantiles_pct}};
    }
    jl["cells"] = cells;
    levels.push_back(jl);
  }
  j["levels"] = levels;
  j["quantile_levels"] = kQuantileLevels;
  return j.dump(2) + "\n";
}

}  // namespace hamid
