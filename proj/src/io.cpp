#include "hamid/io.hpp"

#include "hamid/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace hamid {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw ParseError("");
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse " + what + " '" + s + "' as a number");
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Observable parse_observable(const json& j, int n) {
  auto check = [n](const PauliString& p) {
    if (p.n != n) throw ParseError("observable " + p.to_string() + " has wrong qubit count");
    return p;
  };
  if (j.is_string()) return Observable::word(check(PauliString::parse(j.get<std::string>())));
  if (!j.is_object() || !j.contains("terms")) throw ParseError("observable must be a word or an object with terms");
  Observable o;
  for (const auto& t : j.at("terms")) {
    o.terms.emplace_back(check(PauliString::parse(t.at("pauli").get<std::string>())), t.value("weight", 1.0));
  }
  o.label = j.value("label", o.terms.empty() ? std::string("O") : o.terms.front().first.to_string());
  return o;
}

InitialState parse_state(const json& j, int n) {
  if (j.contains("plus_i_qubit")) return plus_i_state(n, j.at("plus_i_qubit").get<int>());
  if (j.contains("basis")) {
    const auto bits = j.at("basis").get<std::string>();
    if (static_cast<int>(bits.size()) != n) throw ParseError("basis state has wrong length");
    return basis_state(bits);
  }
  if (j.contains("amplitudes")) {
    const auto& a = j.at("amplitudes");
    if (a.size() != (std::size_t{1} << n)) throw ParseError("amplitudes must have 2^n entries");
    InitialState s;
    s.label = j.value("label", std::string("amplitudes"));
    s.psi.resize(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto& z = a[i];
      s.psi(static_cast<Eigen::Index>(i)) =
          z.is_array() ? std::complex<double>(z.at(0).get<double>(), z.at(1).get<double>())
                       : std::complex<double>(z.get<double>(), 0.0);
    }
    return s;
  }
  throw ParseError("initial_state needs plus_i_qubit, basis or amplitudes");
}

Experiment parse_experiment_json(const json& j) {
  Experiment e;
  std::map<std::string, double> nominal_values;
  int n = 0;
  if (j.contains("chain")) {
    const auto& c = j.at("chain");
    ChainSpec spec;
    spec.n = c.at("n").get<int>();
    spec.omegas = c.at("omegas").get<std::vector<double>>();
    spec.deltas = c.value("deltas", std::vector<double>{});
    if (c.contains("unknown")) spec.unknown = c.at("unknown").get<std::vector<bool>>();
    const Experiment chain = chain_experiment(spec);
    e.model = chain.model;
    e.nominal = chain.nominal;
    n = spec.n;
    e.observables = chain.observables;
    e.initial_state = chain.initial_state;
  } else {
    n = j.at("n").get<int>();
    std::vector<ModelTerm> terms;
    std::vector<std::string> names;
    std::map<std::string, std::size_t> index;
    for (const auto& t : j.at("terms")) {
      const PauliString p = PauliString::parse(t.at("pauli").get<std::string>());
      if (p.n != n) throw ParseError("term " + p.to_string() + " has wrong qubit count");
      if (t.contains("param")) {
        const auto name = t.at("param").get<std::string>();
        auto it = index.find(name);
        if (it == index.end()) {
          it = index.emplace(name, names.size()).first;
          names.push_back(name);
        }
        terms.push_back({p, Unknown{it->second, t.value("scale", 1.0)}});
      } else if (t.contains("value")) {
        terms.push_back({p, Known{t.at("value").get<double>()}});
      } else {
        throw ParseError("term " + p.to_string() + " needs either 'value' or 'param'");
      }
    }
    e.model = HamiltonianModel(n, std::move(terms), names);
    if (j.contains("parameters")) {
      for (const auto& [k, v] : j.at("parameters").items()) nominal_values[k] = v.get<double>();
      for (const auto& name : names) {
        const auto it = nominal_values.find(name);
        if (it == nominal_values.end()) throw ParseError("no nominal value for parameter '" + name + "'");
        e.nominal.push_back(it->second);
      }
    }
    e.observables = {Observable::word(PauliString::single(n, 0, 'X'))};
    e.initial_state = plus_i_state(n, 0);
  }
  if (j.contains("observables")) {
    e.observables.clear();
    for (const auto& o : j.at("observables")) e.observables.push_back(parse_observable(o, n));
  }
  if (j.contains("initial_state")) e.initial_state = parse_state(j.at("initial_state"), n);
  if (e.observables.empty()) throw ParseError("model file lists no observables");
  return e;
}

}  // namespace

Experiment parse_experiment(const std::string& json_text) {
  try {
    return parse_experiment_json(json::parse(json_text));
  } catch (const json::exception& ex) {
    throw ParseError(std::string("model file: ") + ex.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& ex) {
    throw ParseError(std::string("model file: ") + ex.what());
  }
}

Experiment load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment(buf.str());
}

std::string experiment_to_json(const Experiment& e) {
  json j;
  j["n"] = e.model.qubits();
  json terms = json::array();
  for (const ModelTerm& t : e.model.terms()) {
    json jt;
    jt["pauli"] = t.pauli.to_string();
    if (const auto* k = std::get_if<Known>(&t.slot)) {
      jt["value"] = k->value;
    } else {
      const auto& u = std::get<Unknown>(t.slot);
      jt["param"] = e.model.parameter_names()[u.index];
      jt["scale"] = u.scale;
    }
    terms.push_back(jt);
  }
  j["terms"] = terms;
  if (e.has_nominal()) {
    json p = json::object();
    for (std::size_t i = 0; i < e.nominal.size(); ++i) p[e.model.parameter_names()[i]] = e.nominal[i];
    j["parameters"] = p;
  }
  json obs = json::array();
  for (const Observable& o : e.observables) {
    if (o.terms.size() == 1 && o.terms[0].second == 1.0) {
      obs.push_back(o.terms[0].first.to_string());
    } else {
      json jo;
      jo["label"] = o.label;
      for (const auto& [w, c] : o.terms) jo["terms"].push_back({{"pauli", w.to_string()}, {"weight", c}});
      obs.push_back(jo);
    }
  }
  j["observables"] = obs;
  json amps = json::array();
  for (Eigen::Index i = 0; i < e.initial_state.psi.size(); ++i) {
    amps.push_back({e.initial_state.psi(i).real(), e.initial_state.psi(i).imag()});
  }
  j["initial_state"] = {{"label", e.initial_state.label}, {"amplitudes", amps}};
  return j.dump(2) + "\n";
}

void write_trace_csv(std::ostream& os, const TimeTrace& trace) {
  os << "# dt=" << format_double(trace.dt) << '\n';
  os << "# sigma=" << format_double(trace.noise_sigma) << '\n';
  os << "# seed=" << (trace.seed ? std::to_string(*trace.seed) : std::string("none")) << '\n';
  if (!trace.initial_state_label.empty()) os << "# initial_state=" << trace.initial_state_label << '\n';
  if (!trace.channel_labels.empty()) {
    os << "# observables=";
    for (std::size_t i = 0; i < trace.channel_labels.size(); ++i) os << (i ? ";" : "") << trace.channel_labels[i];
    os << '\n';
  }
  os << 't';
  for (std::size_t c = 0; c < trace.channels(); ++c) os << ",y" << c + 1;
  os << '\n';
  for (Eigen::Index j = 0; j < trace.samples.rows(); ++j) {
    os << format_double(static_cast<double>(j) * trace.dt);
    for (Eigen::Index c = 0; c < trace.samples.cols(); ++c) os << ',' << format_double(trace.samples(j, c));
    os << '\n';
  }
}

TimeTrace read_trace_csv(std::istream& is) {
  TimeTrace trace;
  std::optional<double> dt;
  std::vector<std::vector<double>> rows;
  std::vector<double> times;
  std::size_t columns = 0;
  bool header_seen = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key == "dt") {
        dt = to_double(value, "dt");
      } else if (key == "sigma") {
        trace.noise_sigma = to_double(value, "sigma");
      } else if (key == "seed") {
        if (value != "none") trace.seed = std::stoull(value);
      } else if (key == "initial_state") {
        trace.initial_state_label = value;
      } else if (key == "observables") {
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ';')) trace.channel_labels.push_back(item);
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!header_seen) {
      if (cells.size() < 2 || cells[0] != "t") throw ParseError("trace CSV header must start with 't,y1'");
      columns = cells.size();
      header_seen = true;
      continue;
    }
    if (cells.size() != columns) {
      throw ParseError("trace CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                       " cells, expected " + std::to_string(columns));
    }
    times.push_back(to_double(cells[0], "time"));
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(to_double(cells[c], "sample"));
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError("trace CSV has no header");
  if (rows.size() < 2) throw ParseError("trace CSV needs at least two samples");
  if (!dt) dt = times[1] - times[0];
  if (!(*dt > 0.0)) throw ParseError("trace dt must be positive");
  trace.dt = *dt;
  trace.samples.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns - 1));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (std::size_t c = 0; c < columns - 1; ++c) {
      trace.samples(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = rows[j][c];
    }
  }
  return trace;
}

void save_trace(const std::string& path, const TimeTrace& trace) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write trace file '" + path + "'");
  write_trace_csv(out, trace);
  if (!out) throw ParseError("failed writing trace file '" + path + "'");
}

TimeTrace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file '" + path + "'");
  return read_trace_csv(in);
}

}  // namespace hamid
