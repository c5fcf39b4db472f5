#pragma once

// Model files (JSON) and trace files (CSV with '#' metadata lines).
//
// Model file:
//   {
//     "n": 3,
//     "terms": [{"pauli": "ZII", "param": "w1", "scale": -0.5},
//               {"pauli": "XXI", "value": 2.15}, ...],
//     "parameters": {"w1": 1.3},          // optional nominal values
//     "observables": ["XII"],             // or [{"label": .., "terms": [{"pauli": .., "weight": ..}]}]
//     "initial_state": {"plus_i_qubit": 0} | {"basis": "000"} | {"amplitudes": [[re, im], ...]}
//   }
// A {"chain": {"n": 3, "omegas": [...], "deltas": [...], "unknown": [...]}}
// object may replace "n"/"terms"/"parameters"; it expands to the XX chain.
//
// Trace file:
//   # dt=0.0598
//   # sigma=0
//   # seed=none
//   # initial_state=plus_i_qubit=0
//   t,y1
//   0,0
//   ...

#include "hamid/chain.hpp"
#include "hamid/coherence.hpp"
#include "hamid/experiment.hpp"

#include <iosfwd>
#include <string>

namespace hamid {

Experiment parse_experiment(const std::string& json_text);
Experiment load_experiment(const std::string& path);
std::string experiment_to_json(const Experiment& e);

void write_trace_csv(std::ostream& os, const TimeTrace& trace);
TimeTrace read_trace_csv(std::istream& is);

void save_trace(const std::string& path, const TimeTrace& trace);
TimeTrace load_trace(const std::string& path);

// %.17g, shortest form that round-trips.
std::string format_double(double v);

}  // namespace hamid
