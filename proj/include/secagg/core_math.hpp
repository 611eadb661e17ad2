#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "secagg/linalg.hpp"

namespace secagg {

enum class ThresholdMode {
  tail_bound,  // chi-square tail bounds
  exact_cdf,   // exact chi-square quantiles
};

/// Full parameter set of one protocol instance.
struct ProtocolParams {
  int S = 2;  // verifiers
  int n = 1;  // provers
  int d = 1;
  int k = 1;
  double eps = 1.0;       // norm-verification privacy
  double delta = 1e-5;
  double eps_ss = 1.0;    // secret-sharing privacy
  double delta_ss = 1e-5;
  double beta = 0.01;     // completeness/soundness failure probability
  double sigma_ss = 1.0;
  double sigma_v = 1.0;
  double tau = 1.0;
  double rho = 1.0;
  std::optional<double> trunc_B;  // shares clamped to [-B, B] and quantized when set
  double quant_step = 1.0;

  // Structural invariants only (counts, positivity, rho >= 1).
  void validate() const;
};

// Lists every calibration inequality the parameters violate (empty if none):
// the projection-noise DZK floor, the single-honest-verifier share-noise floor,
// the completeness threshold and the soundness radius.
std::vector<std::string> calibration_violations(const ProtocolParams& p,
                                                ThresholdMode mode);

struct CalibrationInputs {
  double eps = 1.0;
  double delta = 1e-5;
  double eps_ss = 1.0;
  double delta_ss = 1e-5;
  double beta = 0.01;
  int S = 2;
  int k = 64;
  int d = 1;
  int n = 1;

  friend bool operator==(const CalibrationInputs&, const CalibrationInputs&) = default;
};

struct CalibrationOptions {
  ThresholdMode mode = ThresholdMode::tail_bound;
  // Calibrate each per-client verification at beta / n so the whole session
  // fails with probability at most beta.
  bool session_calibrated = false;
};

struct DerivationStep {
  std::string name;
  std::string formula_id;
  double value;
};

struct CalibrationReport {
  ProtocolParams params;
  double c_delta = 0.0;
  double lambda = 0.0;  // sqrt(ln(1/beta)) / k
  double rho_exact = 0.0;
  double rho_asymptotic_estimate = 0.0;
  double effective_beta = 0.0;
  ThresholdMode mode = ThresholdMode::tail_bound;
  std::vector<DerivationStep> derivation_log;
};

/// Smallest sigma such that N(0, sigma^2 I) and x + N(0, sigma^2 I) are
/// (eps, delta)-close for every ||x|| <= sensitivity:
/// sensitivity * 2 sqrt(ln(2/delta)) / eps.
double gaussian_sigma(double eps, double delta, double sensitivity = 1.0);

struct Chi2Thresholds {
  double lower;
  double upper;
};

/// For Q ~ chi^2_k: Pr[Q <= lower] <= e^-x and Pr[Q >= upper] <= e^-x with
/// lower = k(1 - 2 sqrt(x/k)) and upper = k(1 + 2 sqrt(x/k) + 2x/k).
Chi2Thresholds chi2_thresholds(std::int64_t k, double x);

/// High-probability bound on ||Wx|| for ||x|| <= 1 and W with N(0, 1/k)
/// entries: sqrt(1 + 2 sqrt(ln(1/delta)/k) + 2 ln(1/delta)/k).
double c_delta(std::int64_t k, double delta);

/// Projection noise needed for (eps, delta)-DZK of the norm check:
/// 2 c_delta sqrt(ln(4/delta)) / eps.
double projection_noise_sigma(double eps, double delta, int k);

/// Acceptance threshold tau that accepts ||x|| <= 1 with probability >= 1 - beta.
double completeness_threshold(int k, int S, double sigma_v, double beta,
                              ThresholdMode mode = ThresholdMode::tail_bound);

/// Smallest rho such that share-sums of norm >= rho are accepted with
/// probability <= beta under threshold tau. In tail-bound mode this throws
/// infeasible-parameters when k <= 4 ln(1/beta).
double soundness_radius(int k, int S, double sigma_v, double tau, double beta,
                        ThresholdMode mode = ThresholdMode::tail_bound);

CalibrationReport calibrate(const CalibrationInputs& in, CalibrationOptions options = {});

/// k x d matrix of i.i.d. N(0, 1/k) entries, a deterministic function of seed.
ProjectionMatrix sample_projection(int k, int d, std::uint64_t seed,
                                   ProjectionProvenance provenance =
                                       ProjectionProvenance::shared_randomness);

// Standard normal helpers on top of std::erfc.
double normal_cdf(double z);
double normal_sf(double z);

// Exact chi-square distribution functions.
double chi2_cdf(double k, double q);
double chi2_quantile(double k, double p);

std::string to_string(ThresholdMode mode);

}  // namespace secagg
