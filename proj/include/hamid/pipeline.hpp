#pragma once

// End-to-end identification: trace -> realization -> continuous generator ->
// transfer function -> parameter estimates.

#include "hamid/coherence.hpp"
#include "hamid/era.hpp"
#include "hamid/experiment.hpp"
#include "hamid/solver.hpp"
#include "hamid/transfer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hamid {

struct IdentifyOptions {
  EraOptions era;
  LogOptions log;
  SolveConfig solve;
  // Derive the aliasing bound from the nominal generator when the model file
  // supplies nominal values and log.spectral_bound is unset.
  bool bound_from_nominal = true;
  // For noisy traces (sigma > 0) the weighted coefficient residual at the
  // best fit grows in proportion to sigma; unless the caller changed
  // solve.tol_residual, acceptance becomes noisy_tol_factor * sigma.
  double noisy_tol_factor = 2.0;
};

struct IdentifyResult {
  CoherenceSystem system;  // model-side accessible set, selector, x0
  Realization realization;
  ResidualReport fit;
  TransferFunction target;
  SolveReport report;
  std::vector<std::string> absent_parameters;
  Diagnostics diagnostics;
};

IdentifyResult identify(const Experiment& experiment, const TimeTrace& trace, const IdentifyOptions& opts = {});

std::string identify_report_json(const IdentifyResult& result);

// Accessible set, identifiability and sampling limits of a model file.
std::string inspect_report(const Experiment& experiment);

}  // namespace hamid
