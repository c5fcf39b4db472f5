#include "hamid/errors.hpp"
#include "hamid/io.hpp"
#include "hamid/pipeline.hpp"
#include "hamid/robustness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kOk = 0;
constexpr int kNoSolution = 2;
constexpr int kStructural = 3;
constexpr int kIo = 4;

std::vector<double> parse_sigma_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw hamid::ParseError("cannot parse sigma value '" + item + "'");
    }
    if (!(out.back() >= 0.0)) throw hamid::ParseError("sigma must be nonnegative");
  }
  if (out.empty()) throw hamid::ParseError("empty sigma list");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw hamid::ParseError("cannot write '" + path + "'");
  out << text;
  if (!out) throw hamid::ParseError("failed writing '" + path + "'");
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw hamid::ParseError("cannot write '" + path.string() + "'");
  writer(out);
  if (!out) throw hamid::ParseError("failed writing '" + path.string() + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian identification from time traces of a few observables"};
  app.require_subcommand(1);

  std::string model_path;
  std::string out_path;
  std::string trace_path;
  std::string sigma_text = "0";
  std::string sv_path;
  double dt = 0.0598;
  double duration = 20.0;
  std::uint64_t seed = 1;
  std::size_t trajectories = 500;
  std::size_t starts = 64;
  std::size_t robustness_starts = 16;
  std::optional<double> epsilon;
  bool lowest_order_only = false;
  bool serial = false;

  auto* sim = app.add_subcommand("simulate", "simulate a (noisy) trace of the model's observables");
  sim->add_option("--model", model_path, "model file (JSON)")->required();
  sim->add_option("--dt", dt, "sampling period in s");
  sim->add_option("--duration", duration, "trace duration in s");
  sim->add_option("--sigma", sigma_text, "noise standard deviation");
  sim->add_option("--seed", seed, "noise seed");
  sim->add_option("--out", out_path, "trace CSV (default stdout)");

  auto* ident = app.add_subcommand("identify", "estimate the unknown parameters from a trace");
  ident->add_option("--model", model_path, "model file (JSON)")->required();
  ident->add_option("--trace", trace_path, "trace CSV")->required();
  ident->add_option("--epsilon", epsilon, "singular value truncation threshold");
  ident->add_option("--starts", starts, "multi-start points");
  ident->add_option("--seed", seed, "solver seed");
  ident->add_flag("--lowest-order-only", lowest_order_only, "use only the lowest-degree coefficient equations");
  ident->add_option("--dump-singular-values", sv_path, "write the Hankel singular values to this CSV");
  ident->add_flag("--serial", serial, "run the multi-start loop on one thread");
  ident->add_option("--out", out_path, "report JSON (default stdout)");

  auto* rob = app.add_subcommand("robustness", "Monte-Carlo noise study on the model's nominal parameters");
  rob->add_option("--model", model_path, "model file (JSON) with nominal parameters")->required();
  rob->add_option("--dt", dt, "sampling period in s");
  rob->add_option("--duration", duration, "trace duration in s");
  auto* rob_sigma = rob->add_option("--sigma", sigma_text, "comma separated noise levels (default 0.01,0.05,0.1,0.15,0.2,0.25)");
  rob->add_option("--trajectories", trajectories, "noise trajectories per level")->check(CLI::Range(10, 1000000));
  rob->add_option("--seed", seed, "master seed");
  rob->add_option("--starts", robustness_starts, "multi-start points per trajectory");
  rob->add_flag("--lowest-order-only", lowest_order_only, "use only the lowest-degree coefficient equations");
  rob->add_flag("--serial", serial, "run trajectories on one thread");
  rob->add_option("--out", out_path, "output directory")->required();

  auto* insp = app.add_subcommand("inspect", "print the accessible set and identifiability checks");
  insp->add_option("--model", model_path, "model file (JSON)")->required();
  insp->add_option("--out", out_path, "report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kIo;
  }

  try {
    const hamid::Experiment experiment = hamid::load_experiment(model_path);

    if (sim->parsed()) {
      const std::vector<double> sigmas = parse_sigma_list(sigma_text);
      if (sigmas.size() != 1) throw hamid::ParseError("simulate takes a single sigma");
      if (!(dt > 0.0) || !(duration >= 0.0)) throw hamid::ParseError("dt must be positive and duration nonnegative");
      if (experiment.model.parameter_count() > 0 && !experiment.has_nominal()) {
        throw hamid::ParseError("simulate needs values for every parameter in the model file");
      }
      const hamid::CoherenceSystem sys = experiment.system();
      hamid::Diagnostics diag;
      hamid::TimeTrace trace = hamid::simulate_trace(sys, dt, hamid::samples_for_duration(duration, dt), &diag);
      if (sigmas[0] > 0.0) trace = hamid::add_noise(trace, sigmas[0], seed);
      trace.initial_state_label = experiment.initial_state.label;
      for (const auto& o : experiment.observables) trace.channel_labels.push_back(o.label);
      for (const auto& w : diag.warnings) std::cerr << "warning: " << w << '\n';
      std::ostringstream os;
      hamid::write_trace_csv(os, trace);
      write_text(out_path, os.str());
      return kOk;
    }

    if (ident->parsed()) {
      const hamid::TimeTrace trace = hamid::load_trace(trace_path);
      hamid::IdentifyOptions opts;
      opts.era.epsilon = epsilon;
      opts.solve.starts = starts;
      opts.solve.seed = seed;
      opts.solve.residual.lowest_order_only = lowest_order_only;
      opts.solve.execution = serial ? hamid::Execution::serial : hamid::Execution::parallel;
      const hamid::IdentifyResult result = hamid::identify(experiment, trace, opts);
      if (!sv_path.empty()) {
        write_file(sv_path, [&](std::ostream& os) { hamid::write_singular_values_csv(os, result.realization); });
      }
      write_text(out_path, hamid::identify_report_json(result));
      for (const auto& w : result.diagnostics.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& w : result.report.diagnostics) std::cerr << "note: " << w << '\n';
      return result.report.found() ? kOk : kNoSolution;
    }

    if (rob->parsed()) {
      hamid::RobustnessConfig cfg;
      cfg.sigmas = parse_sigma_list(rob_sigma->count() ? sigma_text : "0.01,0.05,0.1,0.15,0.2,0.25");
      cfg.trajectories = trajectories;
      cfg.seed = seed;
      cfg.dt = dt;
      cfg.duration = duration;
      cfg.identify.solve.starts = robustness_starts;
      cfg.identify.solve.residual.lowest_order_only = lowest_order_only;
      cfg.execution = serial ? hamid::Execution::serial : hamid::Execution::parallel;
      const hamid::RobustnessReport rep = hamid::run_robustness(experiment, cfg);
      const std::filesystem::path dir(out_path);
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw hamid::ParseError("cannot create output directory '" + out_path + "'");
      write_file(dir / "rel_error_mean.csv", [&](std::ostream& os) { hamid::write_mean_error_csv(os, rep); });
      write_file(dir / "spread.csv", [&](std::ostream& os) { hamid::write_spread_csv(os, rep); });
      write_file(dir / "boxplot.csv", [&](std::ostream& os) { hamid::write_boxplot_csv(os, rep); });
      write_file(dir / "estimates.csv", [&](std::ostream& os) { hamid::write_estimates_csv(os, rep); });
      write_file(dir / "summary.json", [&](std::ostream& os) { os << hamid::robustness_summary_json(rep); });
      for (const auto& r : rep.results) {
        std::cerr << "sigma " << r.sigma << ": " << r.converged << " converged, " << r.dropped << " dropped\n";
      }
      return kOk;
    }

    if (insp->parsed()) {
      write_text(out_path, hamid::inspect_report(experiment));
      return kOk;
    }
  } catch (const hamid::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const hamid::StructuralMismatchError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStructural;
  } catch (const hamid::DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStructural;
  } catch (const hamid::ClosureError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStructural;
  } catch (const hamid::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoSolution;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
