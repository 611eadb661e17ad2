#include "secagg/audit_suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "secagg/error.hpp"
#include "secagg/norm_verification.hpp"
#include "secagg/rng.hpp"
#include "secagg/secret_sharing.hpp"

namespace secagg {

namespace {

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::string coalition_label(const VerifierSet& T) {
  std::string out = "{";
  for (int i : T) {
    if (out.size() > 1) out += ' ';
    out += std::to_string(i);
  }
  return out + "}";
}

// Non-empty subsets of {1..S-1}.
std::vector<VerifierSet> coalitions_without_zero(int S) {
  std::vector<VerifierSet> out;
  for (unsigned mask = 1; mask < (1u << (S - 1)); ++mask) {
    VerifierSet T;
    for (int i = 1; i < S; ++i) {
      if (mask & (1u << (i - 1))) T.insert(i);
    }
    out.push_back(std::move(T));
  }
  return out;
}

// Shares and matrix entries seen by T. W goes to every member of T; it is
// kept once so that duplicated columns do not count twice.
std::vector<double> share_and_matrix_view(const Transcript& t, const VerifierSet& T) {
  std::set<PartyId> parties;
  for (int i : T) parties.insert(verifier_party(i));
  std::vector<Message> kept;
  bool have_matrix = false;
  for (Message& m : view_of(t, parties)) {
    if (m.kind == MessageKind::share) {
      kept.push_back(std::move(m));
    } else if (m.kind == MessageKind::matrix && !have_matrix) {
      have_matrix = true;
      kept.push_back(std::move(m));
    }
  }
  return flatten_view(kept);
}

ProtocolParams simulation_params(int S, int k, int d) {
  CalibrationInputs in;
  in.S = S;
  in.k = k;
  in.d = d;
  in.beta = 0.05;
  return calibrate(in).params;
}

}  // namespace

std::vector<AuditRow> audit_chi2_tails(std::span<const int> ks, std::span<const double> xs,
                                       std::int64_t samples, std::uint64_t seed) {
  std::vector<AuditRow> rows;
  for (int k : ks) {
    const auto estimates =
        chi2_tail_mc(k, xs, samples, derive_seed(seed, {static_cast<std::uint64_t>(k)}));
    for (const Chi2TailEstimate& e : estimates) {
      const std::string params = format("k=%d;x=%g;samples=%lld", k, e.x, static_cast<long long>(samples));
      rows.push_back({"chi2-upper-tail", params, e.upper.rate, e.bound + 3 * e.upper.standard_error,
                      e.upper.at_most(e.bound)});
      rows.push_back({"chi2-lower-tail", params, e.lower.rate, e.bound + 3 * e.lower.standard_error,
                      e.lower.at_most(e.bound)});
    }
  }
  return rows;
}

AuditRow audit_gaussian_mechanism_mc(double eps, double delta, std::int64_t samples,
                                     std::uint64_t seed) {
  const double sigma = gaussian_sigma(eps, delta, 1.0);
  const PrivacyLossEstimate e = privacy_loss_mc(1.0, sigma, 1, eps, samples, seed, delta);
  return {"gaussian-mechanism-mc",
          format("eps=%g;delta=%g;sigma=%.10g;samples=%lld", eps, delta, sigma,
                 static_cast<long long>(samples)),
          e.empirical_exceed_rate, delta + 3 * e.standard_error,
          e.empirical_exceed_rate <= delta + 3 * e.standard_error};
}

std::vector<AuditRow> audit_gaussian_mechanism_analytic(double eps, double delta) {
  const double sigma = gaussian_sigma(eps, delta, 1.0);
  const std::string params = format("eps=%g;delta=%g;sigma=%.10g", eps, delta, sigma);
  const double exceed = gaussian_loss_exceed_probability(1.0, sigma, eps);
  // Tight (eps, delta) profile of the Gaussian mechanism with sensitivity 1.
  const double mu = 1.0 / sigma;
  const double profile = normal_cdf(-eps / mu + mu / 2) - std::exp(eps) * normal_cdf(-eps / mu - mu / 2);
  return {
      {"gaussian-mechanism-loss-tail", params, exceed, delta, exceed <= delta},
      {"gaussian-mechanism-profile", params, profile, delta, profile <= delta},
  };
}

std::vector<AuditRow> audit_projection_privacy(double eps, double delta, int k, int S, int d,
                                               std::int64_t samples, std::uint64_t seed) {
  CalibrationInputs in;
  in.eps = eps;
  in.delta = delta;
  in.S = S;
  in.k = k;
  in.d = d;
  in.beta = 0.05;
  const ProtocolParams p = calibrate(in).params;
  RealVector x(d);
  for (double& v : x.values()) v = 1.0 / std::sqrt(static_cast<double>(d));
  const PrivacyLossEstimate e = conditioned_projection_privacy(p, x, samples, seed);
  const std::string params = format("eps=%g;delta=%g;k=%d;S=%d;d=%d;sigma_v=%.10g;samples=%lld", eps,
                                    delta, k, S, d, p.sigma_v, static_cast<long long>(samples));
  const double bad_limit = delta + 3 * e.bad_event_standard_error;
  const double combined_limit = e.delta_target + 3 * e.combined_standard_error;
  return {
      {"projection-privacy-bad-event", params, e.bad_event_rate, bad_limit, e.bad_event_rate <= bad_limit},
      {"projection-privacy-combined", params, e.combined_rate, combined_limit,
       e.combined_rate <= combined_limit},
  };
}

std::vector<AuditRow> audit_exact_simulation(std::span<const int> verifier_counts, int d, int k,
                                             std::size_t samples, std::uint64_t seed, double alpha) {
  std::vector<AuditRow> rows;
  RealVector x(d);
  x[0] = 1.0;
  for (int S : verifier_counts) {
    const ProtocolParams p = simulation_params(S, k, d);
    for (const VerifierSet& T : coalitions_without_zero(S)) {
      const std::string params =
          format("S=%d;T=%s;d=%d;k=%d;samples=%zu", S, coalition_label(T).c_str(), d, k, samples);
      std::uint64_t mask = 0;
      for (int i : T) mask |= std::uint64_t{1} << i;
      const std::uint64_t base = derive_seed(seed, {static_cast<std::uint64_t>(S), mask});

      const ViewSampler real_shares = [&](std::uint64_t s) {
        const ShareBundle b = share_vector(x, S, p.sigma_ss, s);
        std::vector<double> out;
        for (int i : T) out.insert(out.end(), b.shares[i].values().begin(), b.shares[i].values().end());
        return out;
      };
      const ViewSampler sim_shares = [&](std::uint64_t s) {
        const SimulatedShareView v = simulate_share_view(T, S, d, p.sigma_ss, s);
        std::vector<double> out;
        for (const auto& [i, m] : v.messages) out.insert(out.end(), m.values().begin(), m.values().end());
        return out;
      };
      const ClosenessReport shares = two_sample_closeness(real_shares, sim_shares, samples, base,
                                                          Coupling::independent, alpha, "real", "sim");
      rows.push_back({"share-view-simulation", params, shares.max_statistic(), shares.threshold,
                      shares.consistent});

      const ViewSampler real_nv = [&](std::uint64_t s) {
        const ShareBundle b = share_vector(x, S, p.sigma_ss, derive_seed(s, {1}), "simulated");
        const NormVerificationRun run = run_norm_verification(b, p, derive_seed(s, {2}));
        return share_and_matrix_view(run.transcript, T);
      };
      const ViewSampler sim_nv = [&](std::uint64_t s) {
        const SimulatedNormVerification sim = simulate_norm_verification(
            T, p, honest_reply_function(p.sigma_v, derive_seed(s, {3})), s);
        return share_and_matrix_view(sim.transcript, T);
      };
      const ClosenessReport nv = two_sample_closeness(real_nv, sim_nv, samples, derive_seed(base, {1}),
                                                      Coupling::independent, alpha, "real", "sim");
      rows.push_back({"norm-verification-view-simulation", params, nv.max_statistic(), nv.threshold,
                      nv.consistent});
    }
  }
  return rows;
}

AuditRow audit_truncation(double sigma, double B, double max_probability) {
  const double p = clamp_probability(sigma, B);
  return {"truncation-clamp-probability", format("sigma=%g;B=%g", sigma, B), p, max_probability,
          p <= max_probability};
}

std::vector<AuditRow> run_audit_suite(const AuditSuiteOptions& options) {
  std::vector<AuditRow> rows;
  auto append = [&](std::vector<AuditRow> more) {
    rows.insert(rows.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  };
  const std::uint64_t seed = options.seed;
  const int ks[] = {8, 64, 256};
  const double xs[] = {1.0, 3.0, 4.6};
  append(audit_chi2_tails(ks, xs, options.chi2_samples, derive_seed(seed, {1})));
  rows.push_back(audit_gaussian_mechanism_mc(1.0, 1e-2, options.privacy_samples, derive_seed(seed, {2})));
  append(audit_gaussian_mechanism_analytic(1.0, 1e-5));
  append(audit_projection_privacy(1.0, 1e-2, 64, 2, 16, options.privacy_samples, derive_seed(seed, {3})));
  const int verifier_counts[] = {2, 3};
  append(audit_exact_simulation(verifier_counts, 4, 16, options.simulation_samples, derive_seed(seed, {4})));
  rows.push_back(audit_truncation(20.0, 127.0, 1e-8));
  return rows;
}

}  // namespace secagg
