#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "secagg/audit.hpp"

namespace secagg {

// Each check returns rows ready for write_audit_csv. `statistic` is the
// measured quantity and `threshold` the largest value that still passes.

/// Upper and lower chi-square tail frequencies against e^-x + 3 SE.
std::vector<AuditRow> audit_chi2_tails(std::span<const int> ks, std::span<const double> xs,
                                       std::int64_t samples, std::uint64_t seed);

/// Monte Carlo Pr[|L| > eps] of the calibrated Gaussian mechanism
/// (sensitivity 1) against delta + 3 SE.
AuditRow audit_gaussian_mechanism_mc(double eps, double delta, std::int64_t samples,
                                     std::uint64_t seed);

/// Closed-form Pr[|L| > eps] and the tight privacy profile of the calibrated
/// Gaussian mechanism, each against delta.
std::vector<AuditRow> audit_gaussian_mechanism_analytic(double eps, double delta);

/// Bad-event rate (||Wx|| > c_delta) against delta + 3 SE and combined
/// failure rate against 2 delta + 3 SE, worst-case coalition |T| = S - 1.
std::vector<AuditRow> audit_projection_privacy(double eps, double delta, int k, int S, int d,
                                               std::int64_t samples, std::uint64_t seed);

/// Real versus simulated views for every coalition T with 0 not in T: the
/// shares of the sharing step, and the shares plus W of norm verification.
/// Pass iff no marginal KS statistic exceeds the Bonferroni critical value.
std::vector<AuditRow> audit_exact_simulation(std::span<const int> verifier_counts, int d, int k,
                                             std::size_t samples, std::uint64_t seed,
                                             double alpha = 1e-3);

/// 2 Phi(-B / sigma) against max_probability.
AuditRow audit_truncation(double sigma, double B, double max_probability);

struct AuditSuiteOptions {
  std::int64_t privacy_samples = 100'000;
  std::int64_t chi2_samples = 1'000'000;
  std::size_t simulation_samples = 10'000;
  std::uint64_t seed = 1;
};

/// Every check above at its reference parameters.
std::vector<AuditRow> run_audit_suite(const AuditSuiteOptions& options);

}  // namespace secagg
