#pragma once

// Minimal realization of a sampled output sequence via the Hankel-matrix
// realization algorithm, and recovery of the continuous generator.

#include "hamid/coherence.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <vector>

namespace hamid {

struct HankelConfig {
  std::size_t r = 1;                    // block rows
  std::size_t s = 1;                    // columns
  std::vector<std::size_t> row_offsets; // j_1..j_{r-1}
  std::vector<std::size_t> col_offsets; // t_1..t_{s-1}

  static HankelConfig consecutive(std::size_t r, std::size_t s);
  // r = s = floor((J - 1) / 2), consecutive offsets.
  static HankelConfig for_length(std::size_t samples);

  std::size_t row_offset(std::size_t i) const { return i == 0 ? 0 : row_offsets[i - 1]; }
  std::size_t col_offset(std::size_t l) const { return l == 0 ? 0 : col_offsets[l - 1]; }
  // Samples needed for H(0) and H(1).
  std::size_t required_samples() const;
  void validate() const;
};

// Block (i, l) = y(j_i + shift + t_l), p rows per block.
Eigen::MatrixXd build_hankel(const TimeTrace& trace, const HankelConfig& cfg, std::size_t shift);

struct Realization {
  Eigen::MatrixXd Ad;      // n_sigma x n_sigma
  Eigen::MatrixXd Chat;    // p x n_sigma
  Eigen::VectorXd x0hat;   // n_sigma
  Eigen::VectorXd singular_values;
  std::size_t n_sigma = 0;
  double epsilon = 0.0;
  std::optional<Eigen::MatrixXd> Acont;
  double dt = 0.0;
};

// max(rows, cols) * sigma_max * machine epsilon.
double clean_epsilon(const Eigen::VectorXd& sv, std::size_t rows, std::size_t cols);
// Midpoint (geometric) of the largest ratio between consecutive singular values.
double gap_epsilon(const Eigen::VectorXd& sv);
// Upper edge of the spectral norm of a Hankel matrix filled from i.i.d.
// N(0, sigma^2) samples: sigma * sqrt(2 N ln N) with N = rows + cols. Entries
// repeat along anti-diagonals, so the i.i.d. edge sigma (sqrt(rows) +
// sqrt(cols)) is too low.
double noise_floor_epsilon(double sigma, std::size_t rows, std::size_t cols);

// Realization from H(0), H(1) with `outputs` rows per block. Throws
// EmptySystemError when no singular value exceeds epsilon.
Realization era_realize(const Eigen::MatrixXd& h0, const Eigen::MatrixXd& h1, double epsilon,
                        std::size_t outputs);

struct EraOptions {
  std::optional<HankelConfig> hankel;
  std::optional<double> epsilon;  // overrides the automatic choice
  // Keep exactly this many singular values; takes precedence over epsilon.
  std::optional<std::size_t> order;
};

// Builds both Hankel matrices and picks epsilon: the clean rule when the trace
// carries sigma = 0, the noise floor when sigma > 0 is known.
Realization era_from_trace(const TimeTrace& trace, const EraOptions& opts = {});

struct LogOptions {
  // Known upper bound on the generator spectrum (1/s); dt * bound >= pi is
  // rejected even when the sampled rotation aliases into the principal strip.
  std::optional<double> spectral_bound;
  // Replace Ad by its orthogonal polar factor before the logarithm.
  bool project_unit_circle = false;
  double axis_tolerance = 1e-8;
};

// Acont = log(Ad) / dt using the principal logarithm. Throws AliasingError
// when Ad has an eigenvalue on or near the closed negative real axis.
Realization continuous_generator(Realization real, double dt, const LogOptions& opts = {});

struct ResidualReport {
  double max_abs = 0.0;
  double rms = 0.0;
  double max_output = 0.0;
  bool flagged = false;  // residual exceeds what the trace noise explains
};

// Compares y(j) with Chat Ad^j x0hat over the whole trace.
ResidualReport verify_realization(const Realization& real, const TimeTrace& trace);

// index,singular_value,retained
void write_singular_values_csv(std::ostream& os, const Realization& real);

}  // namespace hamid
