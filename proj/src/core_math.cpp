#include "secagg/core_math.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <string>

#include "secagg/error.hpp"
#include "secagg/kernels.hpp"

namespace secagg {

namespace {

bool in_unit_interval(double v) { return v > 0.0 && v < 1.0; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void ProtocolParams::validate() const {
  require(S >= 2, ErrorCode::invalid_parameter, "S must be >= 2");
  require(n >= 1 && d >= 1 && k >= 1, ErrorCode::invalid_parameter, "n, d, k must be >= 1");
  require(sigma_ss > 0 && sigma_v > 0, ErrorCode::invalid_parameter, "noise scales must be > 0");
  require(tau > 0, ErrorCode::invalid_parameter, "tau must be > 0");
  require(rho >= 1, ErrorCode::invalid_parameter, "rho must be >= 1");
  require(!trunc_B || *trunc_B > 0, ErrorCode::invalid_parameter, "trunc_B must be > 0");
  require(quant_step > 0, ErrorCode::invalid_parameter, "quant_step must be > 0");
}

std::vector<std::string> calibration_violations(const ProtocolParams& p,
                                                ThresholdMode mode) {
  std::vector<std::string> out;
  // Relative slack so that values round-tripped through text still pass.
  constexpr double slack = 1e-12;
  const double sv_min = projection_noise_sigma(p.eps, p.delta, p.k);
  if (p.sigma_v < sv_min * (1 - slack))
    out.push_back("sigma_v " + fmt(p.sigma_v) + " < DZK floor " + fmt(sv_min));
  const double ss_min = gaussian_sigma(p.eps_ss, p.delta_ss, 1.0);
  if (p.sigma_ss < ss_min * (1 - slack))
    out.push_back("sigma_ss " + fmt(p.sigma_ss) + " < single-honest-verifier floor " +
                  fmt(ss_min));
  const double tau_min = completeness_threshold(p.k, p.S, p.sigma_v, p.beta, mode);
  if (p.tau < tau_min * (1 - slack))
    out.push_back("tau " + fmt(p.tau) + " < completeness threshold " + fmt(tau_min));
  try {
    const double rho_min = soundness_radius(p.k, p.S, p.sigma_v, p.tau, p.beta, mode);
    if (p.rho < rho_min * (1 - slack))
      out.push_back("rho " + fmt(p.rho) + " < soundness radius " + fmt(rho_min));
  } catch (const Error& e) {
    out.push_back(e.what());
  }
  return out;
}

double gaussian_sigma(double eps, double delta, double sensitivity) {
  require(eps > 0, ErrorCode::invalid_parameter, "eps must be > 0");
  require(in_unit_interval(delta), ErrorCode::invalid_parameter, "delta must be in (0, 1)");
  require(sensitivity > 0, ErrorCode::invalid_parameter, "sensitivity must be > 0");
  return sensitivity * 2.0 * std::sqrt(std::log(2.0 / delta)) / eps;
}

Chi2Thresholds chi2_thresholds(std::int64_t k, double x) {
  require(k >= 1, ErrorCode::invalid_parameter, "k must be >= 1");
  require(x > 0, ErrorCode::invalid_parameter, "x must be > 0");
  const double kd = static_cast<double>(k);
  const double r = std::sqrt(x / kd);
  return {kd * (1.0 - 2.0 * r), kd * (1.0 + 2.0 * r + 2.0 * x / kd)};
}

double c_delta(std::int64_t k, double delta) {
  require(k >= 1, ErrorCode::invalid_parameter, "k must be >= 1");
  require(in_unit_interval(delta), ErrorCode::invalid_parameter, "delta must be in (0, 1)");
  const double l = std::log(1.0 / delta) / static_cast<double>(k);
  return std::sqrt(1.0 + 2.0 * std::sqrt(l) + 2.0 * l);
}

double projection_noise_sigma(double eps, double delta, int k) {
  require(eps > 0, ErrorCode::invalid_parameter, "eps must be > 0");
  return 2.0 * c_delta(k, delta) * std::sqrt(std::log(4.0 / delta)) / eps;
}

double completeness_threshold(int k, int S, double sigma_v, double beta, ThresholdMode mode) {
  require(k >= 1 && S >= 1, ErrorCode::invalid_parameter, "k and S must be >= 1");
  require(sigma_v > 0, ErrorCode::invalid_parameter, "sigma_v must be > 0");
  require(in_unit_interval(beta), ErrorCode::invalid_parameter, "beta must be in (0, 1)");
  const double kd = k;
  const double scale = 1.0 / kd + S * sigma_v * sigma_v;
  double q;
  if (mode == ThresholdMode::exact_cdf) {
    q = chi2_quantile(kd, 1.0 - beta);
  } else {
    const double l = std::log(1.0 / beta);
    q = kd + 2.0 * l + 2.0 * std::sqrt(kd * l);
  }
  return std::sqrt(scale * q);
}

double soundness_radius(int k, int S, double sigma_v, double tau, double beta,
                        ThresholdMode mode) {
  require(k >= 1 && S >= 1, ErrorCode::invalid_parameter, "k and S must be >= 1");
  require(sigma_v > 0 && tau > 0, ErrorCode::invalid_parameter, "sigma_v and tau must be > 0");
  require(in_unit_interval(beta), ErrorCode::invalid_parameter, "beta must be in (0, 1)");
  const double kd = k;
  double q;
  if (mode == ThresholdMode::exact_cdf) {
    q = chi2_quantile(kd, beta);
  } else {
    q = kd - 2.0 * std::sqrt(kd * std::log(1.0 / beta));
    require(q > 0, ErrorCode::infeasible_parameters,
            "soundness bound is vacuous: k = " + std::to_string(k) +
                " <= 4 ln(1/beta) = " + fmt(4.0 * std::log(1.0 / beta)));
  }
  const double rho2 = kd * tau * tau / q - kd * S * sigma_v * sigma_v;
  // A norm-1 input is always inside the budget.
  return std::sqrt(std::max(rho2, 1.0));
}

CalibrationReport calibrate(const CalibrationInputs& in, CalibrationOptions options) {
  require(in.eps > 0 && in.eps_ss > 0, ErrorCode::invalid_parameter, "eps, eps_ss must be > 0");
  require(in_unit_interval(in.delta) && in_unit_interval(in.delta_ss) &&
              in_unit_interval(in.beta),
          ErrorCode::invalid_parameter, "delta, delta_ss, beta must be in (0, 1)");
  require(in.S >= 2, ErrorCode::invalid_parameter, "S must be >= 2");
  require(in.k >= 1 && in.d >= 1 && in.n >= 1, ErrorCode::invalid_parameter,
          "k, d, n must be >= 1");

  CalibrationReport r;
  r.mode = options.mode;
  r.effective_beta = options.session_calibrated ? in.beta / in.n : in.beta;
  const double beta = r.effective_beta;
  const double kd = in.k;
  const double log_inv_beta = std::log(1.0 / beta);

  if (options.mode == ThresholdMode::tail_bound && kd <= 4.0 * log_inv_beta) {
    throw Error(ErrorCode::infeasible_parameters,
                "k = " + std::to_string(in.k) + " must exceed 4 ln(1/beta) = " +
                    fmt(4.0 * log_inv_beta) + " for the soundness bound to hold");
  }

  ProtocolParams& p = r.params;
  p.S = in.S;
  p.n = in.n;
  p.d = in.d;
  p.k = in.k;
  p.eps = in.eps;
  p.delta = in.delta;
  p.eps_ss = in.eps_ss;
  p.delta_ss = in.delta_ss;
  p.beta = beta;

  r.c_delta = c_delta(in.k, in.delta);
  r.lambda = std::sqrt(log_inv_beta) / kd;
  p.sigma_v = projection_noise_sigma(in.eps, in.delta, in.k);
  // Worst case: a single honest verifier, S - |T| = 1.
  p.sigma_ss = gaussian_sigma(in.eps_ss, in.delta_ss, 1.0);
  p.tau = completeness_threshold(in.k, in.S, p.sigma_v, beta, options.mode);
  p.rho = soundness_radius(in.k, in.S, p.sigma_v, p.tau, beta, options.mode);
  r.rho_exact = p.rho;

  const double a = kd * in.S * p.sigma_v * p.sigma_v;
  r.rho_asymptotic_estimate = std::sqrt(1.0 + 4.0 * (1.0 + a) * std::sqrt(log_inv_beta / kd));

  r.derivation_log = {
      {"c_delta", "jl-norm-bound", r.c_delta},
      {"lambda", "rho-expansion", r.lambda},
      {"sigma_v", "projection-dzk-noise", p.sigma_v},
      {"sigma_ss", "share-dzk-noise", p.sigma_ss},
      {"tau_squared",
       options.mode == ThresholdMode::exact_cdf ? "completeness-exact-quantile"
                                                : "completeness-tail-bound",
       p.tau * p.tau},
      {"tau", "completeness", p.tau},
      {"rho_squared",
       options.mode == ThresholdMode::exact_cdf ? "soundness-exact-quantile"
                                                : "soundness-tail-bound",
       p.rho * p.rho},
      {"rho", "soundness", p.rho},
      {"rho_asymptotic", "rho-first-order-expansion", r.rho_asymptotic_estimate},
  };
  p.validate();
  return r;
}

ProjectionMatrix sample_projection(int k, int d, std::uint64_t seed,
                                   ProjectionProvenance provenance) {
  require(k >= 1 && d >= 1, ErrorCode::invalid_parameter, "k and d must be >= 1");
  const auto rows = static_cast<std::size_t>(k);
  const auto cols = static_cast<std::size_t>(d);
  std::vector<double> entries(rows * cols);
  kernels::fill_gaussian_rows(entries, rows, cols, seed, 1.0 / std::sqrt(static_cast<double>(k)));
  return ProjectionMatrix(rows, cols, std::move(entries), provenance);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double chi2_cdf(double k, double q) {
  if (q <= 0) return 0.0;
  return boost::math::cdf(boost::math::chi_squared_distribution<double>(k), q);
}

double chi2_quantile(double k, double p) {
  require(k > 0 && in_unit_interval(p), ErrorCode::invalid_parameter,
          "chi-square quantile needs k > 0 and p in (0, 1)");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(k), p);
}

std::string to_string(ThresholdMode mode) {
  return mode == ThresholdMode::exact_cdf ? "exact-cdf" : "tail-bound";
}

}  // namespace secagg
