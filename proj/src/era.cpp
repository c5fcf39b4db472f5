#include "hamid/era.hpp"

#include "hamid/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace hamid {

HankelConfig HankelConfig::consecutive(std::size_t r, std::size_t s) {
  if (r == 0 || s == 0) throw Error("Hankel dimensions must be positive");
  HankelConfig cfg;
  cfg.r = r;
  cfg.s = s;
  for (std::size_t i = 1; i < r; ++i) cfg.row_offsets.push_back(i);
  for (std::size_t l = 1; l < s; ++l) cfg.col_offsets.push_back(l);
  return cfg;
}

HankelConfig HankelConfig::for_length(std::size_t samples) {
  if (samples < 3) throw InsufficientSamplesError("need at least three samples for a Hankel pair");
  const std::size_t half = (samples - 1) / 2;
  return consecutive(half, half);
}

std::size_t HankelConfig::required_samples() const {
  return row_offset(r - 1) + col_offset(s - 1) + 2;
}

void HankelConfig::validate() const {
  if (r == 0 || s == 0) throw Error("Hankel dimensions must be positive");
  if (row_offsets.size() != r - 1 || col_offsets.size() != s - 1) {
    throw Error("Hankel offset lists must have r-1 and s-1 entries");
  }
}

Eigen::MatrixXd build_hankel(const TimeTrace& trace, const HankelConfig& cfg, std::size_t shift) {
  cfg.validate();
  const std::size_t p = trace.channels();
  const std::size_t last = cfg.row_offset(cfg.r - 1) + cfg.col_offset(cfg.s - 1) + shift;
  if (last >= trace.length()) {
    std::ostringstream msg;
    msg << "Hankel matrix needs sample " << last << " but the trace has " << trace.length();
    throw InsufficientSamplesError(msg.str());
  }
  Eigen::MatrixXd h(static_cast<Eigen::Index>(cfg.r * p), static_cast<Eigen::Index>(cfg.s));
  for (std::size_t i = 0; i < cfg.r; ++i) {
    for (std::size_t l = 0; l < cfg.s; ++l) {
      const auto j = static_cast<Eigen::Index>(cfg.row_offset(i) + shift + cfg.col_offset(l));
      h.block(static_cast<Eigen::Index>(i * p), static_cast<Eigen::Index>(l),
              static_cast<Eigen::Index>(p), 1) = trace.samples.row(j).transpose();
    }
  }
  return h;
}

double clean_epsilon(const Eigen::VectorXd& sv, std::size_t rows, std::size_t cols) {
  if (sv.size() == 0) return 0.0;
  return static_cast<double>(std::max(rows, cols)) * sv(0) * std::numeric_limits<double>::epsilon();
}

double gap_epsilon(const Eigen::VectorXd& sv) {
  if (sv.size() == 0) return 0.0;
  if (sv.size() == 1) return sv(0) * 0.5;
  Eigen::Index best = 0;
  double best_ratio = 0.0;
  const double floor = sv(0) * std::numeric_limits<double>::epsilon();
  for (Eigen::Index i = 0; i + 1 < sv.size(); ++i) {
    const double ratio = sv(i) / std::max(sv(i + 1), floor);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = i;
    }
  }
  return std::sqrt(sv(best) * std::max(sv(best + 1), floor));
}

double noise_floor_epsilon(double sigma, std::size_t rows, std::size_t cols) {
  const double n = static_cast<double>(rows + cols);
  return sigma * std::sqrt(2.0 * n * std::log(n));
}

Realization era_realize(const Eigen::MatrixXd& h0, const Eigen::MatrixXd& h1, double epsilon,
                        std::size_t outputs) {
  if (h0.rows() != h1.rows() || h0.cols() != h1.cols()) {
    throw DimensionError("era_realize: H(0) and H(1) shapes differ");
  }
  if (!(epsilon > 0.0)) throw Error("era_realize: epsilon must be positive");
  if (outputs == 0 || h0.rows() % static_cast<Eigen::Index>(outputs) != 0) {
    throw DimensionError("era_realize: row count is not a multiple of the output count");
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(h0, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Realization real;
  real.singular_values = svd.singularValues();
  real.epsilon = epsilon;
  Eigen::Index n = 0;
  while (n < real.singular_values.size() && real.singular_values(n) > epsilon) ++n;
  if (n == 0) {
    std::ostringstream msg;
    msg << "no singular value above epsilon = " << epsilon << "; the trace carries no dynamics";
    throw EmptySystemError(msg.str());
  }
  real.n_sigma = static_cast<std::size_t>(n);

  const Eigen::MatrixXd p1 = svd.matrixU().leftCols(n);
  const Eigen::MatrixXd q1 = svd.matrixV().leftCols(n);
  const Eigen::VectorXd sig = real.singular_values.head(n);
  const Eigen::VectorXd root = sig.cwiseSqrt();
  const Eigen::VectorXd inv_root = root.cwiseInverse();

  real.Ad = inv_root.asDiagonal() * (p1.transpose() * h1 * q1) * inv_root.asDiagonal();
  real.Chat = (p1 * root.asDiagonal()).topRows(static_cast<Eigen::Index>(outputs));
  real.x0hat = root.asDiagonal() * q1.row(0).transpose();
  return real;
}

Realization era_from_trace(const TimeTrace& trace, const EraOptions& opts) {
  const HankelConfig cfg = opts.hankel ? *opts.hankel : HankelConfig::for_length(trace.length());
  if (cfg.required_samples() > trace.length()) {
    std::ostringstream msg;
    msg << "Hankel configuration needs " << cfg.required_samples() << " samples, trace has "
        << trace.length();
    throw InsufficientSamplesError(msg.str());
  }
  const Eigen::MatrixXd h0 = build_hankel(trace, cfg, 0);
  const Eigen::MatrixXd h1 = build_hankel(trace, cfg, 1);

  double eps = 0.0;
  if (opts.order) {
    const Eigen::VectorXd sv = h0.bdcSvd().singularValues();
    const auto k = static_cast<Eigen::Index>(*opts.order);
    if (k < 1 || k > sv.size()) throw DimensionError("era: requested order exceeds the Hankel rank bound");
    if (!(sv(k - 1) > 0.0)) throw EmptySystemError("era: requested order exceeds the numerical rank");
    eps = k == sv.size() ? 0.5 * sv(k - 1) : std::sqrt(sv(k - 1) * std::max(sv(k), 1e-300 * sv(0)));
    if (!(eps < sv(k - 1))) eps = 0.5 * sv(k - 1);
  } else if (opts.epsilon) {
    eps = *opts.epsilon;
  } else {
    const Eigen::VectorXd sv = h0.bdcSvd().singularValues();
    const auto rows = static_cast<std::size_t>(h0.rows());
    const auto cols = static_cast<std::size_t>(h0.cols());
    if (trace.noise_sigma > 0.0) {
      eps = noise_floor_epsilon(trace.noise_sigma, rows, cols);
    } else {
      eps = clean_epsilon(sv, rows, cols);
      if (!(eps > 0.0)) eps = std::numeric_limits<double>::min();
    }
  }
  Realization real = era_realize(h0, h1, eps, trace.channels());
  real.dt = trace.dt;
  return real;
}

Realization continuous_generator(Realization real, double dt, const LogOptions& opts) {
  if (!(dt > 0.0)) throw Error("continuous_generator: dt must be positive");
  if (opts.spectral_bound && *opts.spectral_bound * dt >= M_PI) {
    std::ostringstream msg;
    msg << "sampling period " << dt << " s exceeds the Nyquist limit " << M_PI / *opts.spectral_bound
        << " s implied by the spectral bound; resample with a smaller dt";
    throw AliasingError(msg.str());
  }

  Eigen::MatrixXd ad = real.Ad;
  if (opts.project_unit_circle) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ad, Eigen::ComputeFullU | Eigen::ComputeFullV);
    ad = svd.matrixU() * svd.matrixV().transpose();
  }

  const Eigen::VectorXcd ev = ad.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const std::complex<double> z = ev(i);
    const double mag = std::abs(z);
    if (mag < 1e-300) throw AliasingError("discrete generator is singular; no logarithm exists");
    if (z.real() < 0.0 && std::abs(z.imag()) <= opts.axis_tolerance * mag) {
      std::ostringstream msg;
      msg << "discrete generator has eigenvalue " << z.real() << (z.imag() < 0 ? "" : "+") << z.imag()
          << "i on the negative real axis: the sampled rotation reaches angle pi. "
             "Use a smaller dt";
      throw AliasingError(msg.str());
    }
  }
  real.Acont = Eigen::MatrixXd(ad.log()) / dt;
  real.dt = dt;
  return real;
}

ResidualReport verify_realization(const Realization& real, const TimeTrace& trace) {
  if (static_cast<std::size_t>(real.Chat.rows()) != trace.channels()) {
    throw DimensionError("verify_realization: channel count differs from realization");
  }
  ResidualReport rep;
  Eigen::VectorXd x = real.x0hat;
  double sum_sq = 0.0;
  for (Eigen::Index j = 0; j < trace.samples.rows(); ++j) {
    const Eigen::VectorXd yhat = real.Chat * x;
    for (Eigen::Index c = 0; c < trace.samples.cols(); ++c) {
      const double y = trace.samples(j, c);
      const double d = std::abs(yhat(c) - y);
      rep.max_abs = std::max(rep.max_abs, d);
      rep.max_output = std::max(rep.max_output, std::abs(y));
      sum_sq += d * d;
    }
    x = real.Ad * x;
  }
  rep.rms = std::sqrt(sum_sq / static_cast<double>(trace.samples.size()));
  if (trace.noise_sigma > 0.0) {
    rep.flagged = rep.rms > 2.0 * trace.noise_sigma;
  } else {
    rep.flagged = rep.max_abs > 1e-6 * std::max(rep.max_output, 1e-300);
  }
  return rep;
}

void write_singular_values_csv(std::ostream& os, const Realization& real) {
  os << "index,singular_value,retained\n";
  char buf[64];
  for (Eigen::Index i = 0; i < real.singular_values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", real.singular_values(i));
    os << i << ',' << buf << ',' << (static_cast<std::size_t>(i) < real.n_sigma ? 1 : 0) << '\n';
  }
}

}  // namespace hamid
