#include "hamid/pipeline.hpp"

#include "hamid/errors.hpp"
#include "hamid/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hamid {

using nlohmann::json;

IdentifyResult identify(const Experiment& experiment, const TimeTrace& trace, const IdentifyOptions& opts) {
  IdentifyResult out;
  const HamiltonianModel& model = experiment.model;
  out.system = experiment.system();

  if (trace.channels() != experiment.observables.size()) {
    std::ostringstream msg;
    msg << "trace has " << trace.channels() << " output channels but the model file measures "
        << experiment.observables.size() << " observables";
    throw StructuralMismatchError(msg.str());
  }
  if (!trace.initial_state_label.empty() && trace.initial_state_label != experiment.initial_state.label) {
    out.diagnostics.warnings.push_back("trace was recorded from initial state '" + trace.initial_state_label +
                                       "' but the model file prepares '" + experiment.initial_state.label + "'");
  }

  const LinearGenerator lin = linear_generator(model, out.system.accessible);
  for (std::size_t i : absent_parameters(lin)) {
    out.absent_parameters.push_back(model.parameter_names()[i]);
    out.diagnostics.warnings.push_back("parameter '" + model.parameter_names()[i] +
                                       "' never enters the accessible dynamics and cannot be identified");
  }

  out.realization = era_from_trace(trace, opts.era);
  if (out.realization.n_sigma != out.system.order()) {
    std::ostringstream msg;
    msg << "realization order " << out.realization.n_sigma << " differs from the accessible dimension "
        << out.system.order();
    out.diagnostics.warnings.push_back(msg.str());
  }

  LogOptions log = opts.log;
  if (!log.spectral_bound && opts.bound_from_nominal && experiment.has_nominal()) {
    const double nyq = nyquist_max_dt(out.system.generator);
    if (std::isfinite(nyq)) log.spectral_bound = M_PI / nyq;
  }
  out.realization = continuous_generator(std::move(out.realization), trace.dt, log);
  out.fit = verify_realization(out.realization, trace);
  if (out.fit.flagged) {
    std::ostringstream msg;
    msg << "realization residual (rms " << out.fit.rms << ") exceeds what the trace noise explains";
    out.diagnostics.warnings.push_back(msg.str());
  }

  out.target = transfer_coefficients(*out.realization.Acont, out.realization.Chat, out.realization.x0hat);

  SolveConfig cfg = opts.solve;
  if (trace.noise_sigma > 0.0 && cfg.tol_residual == SolveConfig{}.tol_residual) {
    cfg.tol_residual = std::max(cfg.tol_residual, opts.noisy_tol_factor * trace.noise_sigma);
  }
  out.report = solve(model, out.target, out.system, cfg);
  return out;
}

std::string identify_report_json(const IdentifyResult& r) {
  json j;
  const SolveReport& rep = r.report;
  j["parameters"] = rep.parameter_names;
  j["equations"] = rep.equation_labels;
  j["realization"] = {{"n_sigma", r.realization.n_sigma},
                      {"accessible_dimension", r.system.order()},
                      {"epsilon", r.realization.epsilon},
                      {"residual_rms", r.fit.rms},
                      {"residual_max", r.fit.max_abs}};
  json den = json::array();
  for (Eigen::Index i = 0; i < r.target.den.size(); ++i) den.push_back(r.target.den(i));
  json num = json::array();
  for (const Eigen::VectorXd& q : r.target.num) {
    json c = json::array();
    for (Eigen::Index i = 0; i < q.size(); ++i) c.push_back(q(i));
    num.push_back(c);
  }
  j["transfer_function"] = {{"den", den}, {"num", num}};
  j["solver"] = {{"starts", rep.starts},
                 {"converged_starts", rep.converged_starts},
                 {"best_residual", rep.best_residual},
                 {"best_theta", rep.best_theta},
                 {"class_count", rep.class_count},
                 {"flagged_classes", rep.flagged_classes},
                 {"insensitive", rep.insensitive},
                 {"jacobian_condition", rep.jacobian_condition}};
  json est = json::array();
  for (const ParameterEstimate& e : rep.estimates) {
    json je;
    je["class"] = e.class_id;
    je["residual"] = e.residual_norm;
    je["iterations"] = e.iterations;
    json th = json::object();
    for (std::size_t i = 0; i < e.theta.size(); ++i) th[rep.parameter_names[i]] = e.theta[i];
    je["theta"] = th;
    est.push_back(je);
  }
  j["estimates"] = est;
  std::vector<std::string> notes = r.diagnostics.warnings;
  notes.insert(notes.end(), rep.diagnostics.begin(), rep.diagnostics.end());
  j["diagnostics"] = notes;
  return j.dump(2) + "\n";
}

std::string inspect_report(const Experiment& e) {
  std::ostringstream os;
  const HamiltonianModel& model = e.model;
  const CoherenceSystem sys = e.system();
  os << "qubits: " << model.qubits() << '\n';
  os << "terms: " << model.terms().size() << '\n';
  os << "parameters:";
  for (const auto& name : model.parameter_names()) os << ' ' << name;
  os << '\n';
  os << "observables:";
  for (const Observable& o : e.observables) os << ' ' << o.label;
  os << '\n';
  os << "initial state: " << e.initial_state.label << '\n';
  os << "accessible set (K = " << sys.order() << "):\n";
  for (std::size_t k = 0; k < sys.order(); ++k) {
    os << "  " << k + 1 << ' ' << sys.accessible[k].to_string() << "  x0=" << format_double(sys.x0(static_cast<Eigen::Index>(k)))
       << '\n';
  }
  const LinearGenerator lin = linear_generator(model, sys.accessible);
  const std::vector<std::size_t> absent = absent_parameters(lin);
  if (absent.empty()) {
    os << "identifiability precondition: every parameter enters the accessible generator\n";
  } else {
    for (std::size_t i : absent) {
      os << "warning: parameter '" << model.parameter_names()[i]
         << "' does not enter the accessible generator and is not identifiable from these observables\n";
    }
  }
  if (sys.x0.cwiseAbs().maxCoeff() == 0.0) {
    os << "warning: the initial coherence vector vanishes on the accessible set; the output carries no dynamics\n";
  }
  if (e.has_nominal()) {
    os << "nominal:";
    for (std::size_t i = 0; i < e.nominal.size(); ++i) {
      os << ' ' << model.parameter_names()[i] << '=' << format_double(e.nominal[i]);
    }
    os << '\n';
    const double nyq = nyquist_max_dt(sys.generator);
    if (std::isfinite(nyq)) {
      os << "nyquist dt bound: " << format_double(nyq) << " s\n";
    } else {
      os << "nyquist dt bound: none (generator vanishes)\n";
    }
  } else {
    os << "nyquist dt bound: needs nominal parameter values\n";
  }
  return os.str();
}

}  // namespace hamid
