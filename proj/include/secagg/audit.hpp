#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "secagg/core_math.hpp"
#include "secagg/norm_verification.hpp"
#include "secagg/scenario.hpp"
#include "secagg/transcript.hpp"

namespace secagg {

/// Event frequency with its binomial standard error and a 95% Wald interval
/// clipped to [0, 1].
struct BinomialEstimate {
  std::int64_t events = 0;
  std::int64_t trials = 0;
  double rate = 0.0;
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;

  // rate <= bound + sigmas * SE
  bool at_most(double bound, double sigmas = 3.0) const noexcept;
  // rate >= bound - sigmas * SE
  bool at_least(double bound, double sigmas = 3.0) const noexcept;
};

BinomialEstimate binomial_estimate(std::int64_t events, std::int64_t trials);

// Kolmogorov-Smirnov statistics and asymptotic critical values.
double ks_statistic(std::vector<double> a, std::vector<double> b);
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
double ks_critical_value(std::size_t n, std::size_t m, double alpha);
double ks_critical_value(std::size_t n, double alpha);

/// Draws one view, flattened to numbers, from the given seed.
using ViewSampler = std::function<std::vector<double>(std::uint64_t seed)>;

/// How the two samplers are seeded. `independent` gives the two sides
/// disjoint seed streams; `common` hands both the same seed per sample, so a
/// sampler compared with itself yields identical columns.
enum class Coupling { independent, common };

struct ClosenessReport {
  std::string p_label;
  std::string q_label;
  std::vector<double> statistics;  // one per marginal
  double threshold = 0.0;          // per-marginal KS critical value
  double alpha = 1e-3;             // family-wise significance
  std::size_t samples = 0;
  bool consistent = true;

  double max_statistic() const noexcept;
};

/// Per-marginal two-sample KS tests, Bonferroni-corrected over marginals.
/// Throws shape-mismatch when views differ in length.
ClosenessReport two_sample_closeness(const ViewSampler& p, const ViewSampler& q, std::size_t samples,
                                     std::uint64_t seed, Coupling coupling = Coupling::independent,
                                     double alpha = 1e-3, std::string p_label = "P",
                                     std::string q_label = "Q");

/// Numbers carried by the messages of a view: shares, matrix entries,
/// replies, accept bits (as 0/1), accepted-set sizes and partial sums.
std::vector<double> flatten_view(std::span<const Message> view);

struct PrivacyLossEstimate {
  double eps_target = 0.0;
  double delta_target = 0.0;
  double empirical_exceed_rate = 0.0;  // fraction with |loss| > eps
  double standard_error = 0.0;
  std::int64_t samples = 0;
  // Only set by conditioned_projection_privacy.
  double bad_event_rate = 0.0;
  double bad_event_standard_error = 0.0;
  double combined_rate = 0.0;  // bad event or loss exceed
  double combined_standard_error = 0.0;
};

/// Privacy loss of N(m, sigma^2 I_k) against N(0, sigma^2 I_k), ||m|| =
/// shift_norm, sampled under the shifted distribution.
PrivacyLossEstimate privacy_loss_mc(double shift_norm, double sigma, int k, double eps,
                                    std::int64_t samples, std::uint64_t seed,
                                    double delta_target = 0.0);

/// Pr[|L| > eps] for the Gaussian loss L ~ N(mu, 2 mu), mu = shift^2 / (2 sigma^2).
double gaussian_loss_exceed_probability(double shift_norm, double sigma, double eps);

/// Samples W, marks ||Wx|| > c_delta as a bad event, otherwise draws the
/// shifted-Gaussian loss with shift ||Wx|| and noise variance
/// (S - |T|) sigma_v^2. Defaults to the worst case |T| = S - 1.
PrivacyLossEstimate conditioned_projection_privacy(const ProtocolParams& params, const RealVector& x,
                                                   std::int64_t samples, std::uint64_t seed,
                                                   int coalition_size = -1);

/// Empirical frequencies of the chi-square(k) tail events
/// Z >= k(1 + 2 sqrt(x/k) + 2x/k) and Z <= k(1 - 2 sqrt(x/k)) for each x,
/// using one sample set for all x.
struct Chi2TailEstimate {
  double x = 0.0;
  BinomialEstimate upper;
  BinomialEstimate lower;
  double bound = 0.0;  // e^{-x}
};

std::vector<Chi2TailEstimate> chi2_tail_mc(int k, std::span<const double> xs, std::int64_t samples,
                                           std::uint64_t seed);

/// Runs the scenario on independent trial seeds and counts the event.
using ScenarioEvent = std::function<bool(const ScenarioRun&)>;
BinomialEstimate rate_estimate(const Scenario& scenario, const ProtocolParams& params,
                               const ScenarioEvent& event, std::int64_t trials, std::uint64_t seed);

/// Norm verification acceptance frequency for bundles produced per trial.
using BundleFactory = std::function<ShareBundle(std::uint64_t trial_seed)>;
BinomialEstimate accept_rate(const BundleFactory& make_bundle, const ProtocolParams& params,
                             std::int64_t trials, std::uint64_t seed, WMode w_mode = WMode::shared);

/// Verifier 0's ||v|| per trial, with the trial layout of accept_rate. The
/// norms do not depend on tau, so one run serves every threshold.
std::vector<double> verification_norms(const BundleFactory& make_bundle, const ProtocolParams& params,
                                       std::int64_t trials, std::uint64_t seed,
                                       WMode w_mode = WMode::shared);

/// Bundle whose shares sum to a vector of the given norm and mass pattern.
BundleFactory fixed_norm_bundles(const ProtocolParams& params, double norm, MassPattern pattern);

struct AuditRow {
  std::string check_id;
  std::string parameters;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline constexpr std::string_view kAuditSchema = "secagg-audit/1";

void write_audit_csv(std::ostream& out, std::span<const AuditRow> rows);

/// RFC 4180 quoting for one field.
std::string csv_field(std::string_view text);

}  // namespace secagg
