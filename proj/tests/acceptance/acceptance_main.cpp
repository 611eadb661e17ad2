// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass criterion numbers as arguments to run a
// subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "secagg/audit.hpp"
#include "secagg/audit_suite.hpp"
#include "secagg/experiment.hpp"
#include "secagg/rng.hpp"
#include "secagg/scenario.hpp"
#include "secagg/secret_sharing.hpp"

using namespace secagg;

namespace {

constexpr std::uint64_t kSeed = 20240611;

void detail(const char* fmt, auto... args) {
  std::printf("    ");
  std::printf(fmt, args...);
  std::printf("\n");
}

bool report_rows(const std::vector<AuditRow>& rows) {
  bool ok = true;
  for (const AuditRow& r : rows) {
    detail("%-36s %-58s stat=%-12.6g limit=%-12.6g %s", r.check_id.c_str(), r.parameters.c_str(),
           r.statistic, r.threshold, r.pass ? "ok" : "FAILED");
    ok = ok && r.pass;
  }
  return ok;
}

// 1: honest ||x|| = 1 accepted with probability >= 1 - beta.
bool completeness() {
  bool ok = true;
  ExperimentOptions opt;
  for (int k : {16, 64}) {
    for (int S : {2, 3}) {
      for (int d : {32, 1024}) {
        // sigma_v and the shares do not depend on beta, so one run of 1e4
        // sessions is thresholded at each beta's tau.
        const ProtocolParams p = grid_params({k, S, d, 0.05}, opt, true);
        const std::vector<double> norms =
            verification_norms(fixed_norm_bundles(p, 1.0, MassPattern::random), p, 10'000,
                               derive_seed(kSeed, {1, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(S),
                                                    static_cast<std::uint64_t>(d)}));
        for (double beta : {0.05, 0.01}) {
          const double tau = grid_params({k, S, d, beta}, opt, true).tau;
          const auto accepted = std::count_if(norms.begin(), norms.end(), [&](double v) { return v < tau; });
          const BinomialEstimate e = binomial_estimate(accepted, static_cast<std::int64_t>(norms.size()));
          const bool pass = e.at_least(1.0 - beta);
          detail("k=%-3d S=%d d=%-4d beta=%.2f tau=%9.4f accept=%.4f (SE %.4f) >= %.2f - 3SE  %s", k, S, d,
                 beta, tau, e.rate, e.standard_error, 1.0 - beta, pass ? "ok" : "FAILED");
          ok = ok && pass;
        }
      }
    }
  }
  return ok;
}

// 2: share-sums of norm exactly rho accepted with probability <= beta.
bool soundness() {
  bool ok = true;
  ExperimentOptions opt;
  opt.trials = 10'000;
  opt.norm_factor = 1.0;
  const GridPoint points[] = {{64, 2, 32, 0.05}, {64, 2, 32, 0.01},  {64, 3, 32, 0.05},
                              {64, 3, 32, 0.01}, {16, 2, 32, 0.05},  {64, 2, 1024, 0.01}};
  std::uint64_t i = 0;
  for (const GridPoint& g : points) {
    for (MassPattern pattern : {MassPattern::concentrated, MassPattern::spread}) {
      opt.pattern = pattern;
      opt.seed = derive_seed(kSeed, {2, ++i});
      const ExperimentRow r = run_experiment(ExperimentKind::soundness, g, opt);
      detail("k=%-3d S=%d d=%-4d beta=%.2f %-12s rho=%9.4f accept=%.4f (SE %.4f) <= beta + 3SE  %s", g.k,
             g.S, g.d, g.beta, to_string(pattern).c_str(), r.rho, r.estimate.rate,
             r.estimate.standard_error, r.pass ? "ok" : "FAILED");
      ok = ok && r.pass;
    }
  }
  detail("%s", "k=16 with beta=0.01 is infeasible for the soundness bound and is not run");
  return ok;
}

// 3: one adversary among n = 20 never pushes a share-sum above rho into the
// aggregate more often than beta, and an excluded adversary leaves the sum
// bit-identical.
bool robustness() {
  bool ok = true;
  ExperimentOptions opt;
  opt.trials = 2'000;
  opt.n = 20;
  const GridPoint g{64, 2, 32, 0.05};
  std::uint64_t i = 0;
  for (MassPattern pattern : {MassPattern::spread, MassPattern::concentrated}) {
    for (double factor : {0.5, 1.0, 2.0, 10.0}) {
      opt.pattern = pattern;
      opt.norm_factor = factor;
      opt.seed = derive_seed(kSeed, {3, ++i});
      const ExperimentRow r = run_experiment(ExperimentKind::robustness, g, opt);
      detail("%-12s norm=%4.1f rho  passed-above-rho=%.4f (SE %.4f) <= %.2f + 3SE  excluded sessions=%lld "
             "max shift=%g  %s",
             to_string(pattern).c_str(), factor, r.estimate.rate, r.estimate.standard_error, g.beta,
             static_cast<long long>(r.deviation_sessions), r.max_deviation, r.pass ? "ok" : "FAILED");
      ok = ok && r.pass;
    }
  }
  return ok;
}

// 4: all-honest sessions accept everyone with probability >= 1 - n beta and
// the output equals the true sum.
bool correctness() {
  bool ok = true;
  ExperimentOptions opt;
  opt.trials = 1'000;
  opt.n = 50;
  std::uint64_t i = 0;
  for (double beta : {0.01, 0.001}) {
    opt.seed = derive_seed(kSeed, {4, ++i});
    const ExperimentRow r = run_experiment(ExperimentKind::correctness, {64, 2, 256, beta}, opt);
    detail("n=50 S=2 d=256 k=64 beta=%.3f  J*=[n] rate=%.4f (SE %.4f) >= %.2f - 3SE  max |sum error|=%.3g "
           "<= 1e-6 over %lld sessions  %s",
           beta, r.estimate.rate, r.estimate.standard_error, r.bound, r.max_deviation,
           static_cast<long long>(r.deviation_sessions), r.pass ? "ok" : "FAILED");
    ok = ok && r.pass && r.deviation_sessions > 0;
  }
  return ok;
}

// 5: simulated views are distributed exactly like real ones.
bool exact_simulation() {
  const int counts[] = {2, 3};
  return report_rows(audit_exact_simulation(counts, 4, 16, 10'000, derive_seed(kSeed, {5})));
}

// 6: the Gaussian mechanism's privacy loss exceeds eps with probability <= delta.
bool gaussian_mechanism() {
  std::vector<AuditRow> rows = audit_gaussian_mechanism_analytic(1.0, 1e-5);
  rows.insert(rows.begin(), audit_gaussian_mechanism_mc(1.0, 1e-2, 100'000, derive_seed(kSeed, {6})));
  return report_rows(rows);
}

// 7: the noisy projection is (eps, 2 delta)-private once ||Wx|| > c_delta is
// counted as failure.
bool projection_privacy() {
  return report_rows(audit_projection_privacy(1.0, 1e-2, 64, 2, 16, 100'000, derive_seed(kSeed, {7})));
}

// 8: chi-square tail bounds hold empirically.
bool chi2_tails() {
  const int ks[] = {8, 64, 256};
  const double xs[] = {1.0, 3.0, 4.6};
  return report_rows(audit_chi2_tails(ks, xs, 1'000'000, derive_seed(kSeed, {8})));
}

// 9: truncating 7-bit shares at B = 127 with sigma = 20 clamps with
// probability 2 Phi(-6.35) <= 1e-8.
bool truncation() {
  detail("2 Phi(-6.35) = %.15e", clamp_probability(20.0, 127.0));
  return report_rows({audit_truncation(20.0, 127.0, 1e-8)});
}

Scenario shape(int honest, int adversaries, int S, int d, int k) {
  Scenario s;
  s.calibration.S = S;
  s.calibration.d = d;
  s.calibration.k = k;
  s.calibration.beta = 0.05;
  s.honest = honest;
  s.norm_inflating = adversaries;
  s.adversary_norm = 3.0;
  return s;
}

struct Traffic {
  TrafficSummary measured;
  CommunicationPrediction predicted;
};

Traffic measure(const Scenario& s, std::uint64_t seed) {
  const ProtocolParams p = calibrate_scenario(s).params;
  const ScenarioRun run = run_scenario(s, p, seed);
  return {traffic(run.transcript), predict_communication(p, s.n(), 16, run.result.accepted.size())};
}

// 10: measured bytes equal the closed form and scale linearly.
bool communication() {
  bool ok = true;
  Scenario quantized = shape(5, 0, 4, 16, 24);
  quantized.trunc_B = 127.0;
  const Scenario shapes[] = {shape(10, 0, 2, 64, 32), shape(6, 1, 3, 200, 48), quantized};
  for (const Scenario& s : shapes) {
    const Traffic t = measure(s, derive_seed(kSeed, {10}));
    const bool pass = t.measured.client_to_server_bytes == t.predicted.client_to_server &&
                      t.measured.inter_server_bytes == t.predicted.inter_server;
    detail("n=%-2d S=%d d=%-3d k=%-2d %-9s client %zu/%zu inter %zu/%zu (measured/predicted)  %s", s.n(),
           s.calibration.S, s.calibration.d, s.calibration.k, s.trunc_B ? "quantized" : "f64",
           t.measured.client_to_server_bytes, t.predicted.client_to_server, t.measured.inter_server_bytes,
           t.predicted.inter_server, pass ? "ok" : "FAILED");
    ok = ok && pass;
  }

  // Client traffic is n S (c + 8 d); inter-server traffic is (S - 1) times a
  // per-link cost with slope 8 (k + 1) in d and 8 (d + n) in k.
  const int n = 4;
  const std::uint64_t seed = derive_seed(kSeed, {10, 1});
  for (int S : {2, 3}) {
    const Traffic base = measure(shape(n, 0, S, 16, 16), seed);
    const Traffic wide = measure(shape(n, 0, S, 48, 16), seed);
    const Traffic tall = measure(shape(n, 0, S, 16, 40), seed);
    const auto client_slope = static_cast<std::size_t>(n * S * 8 * (48 - 16));
    const auto inter_d_slope = static_cast<std::size_t>((S - 1) * 8 * (16 + 1) * (48 - 16));
    const auto inter_k_slope = static_cast<std::size_t>((S - 1) * 8 * (16 + n) * (40 - 16));
    const bool pass = wide.measured.client_to_server_bytes - base.measured.client_to_server_bytes == client_slope &&
                      tall.measured.client_to_server_bytes == base.measured.client_to_server_bytes &&
                      wide.measured.inter_server_bytes - base.measured.inter_server_bytes == inter_d_slope &&
                      tall.measured.inter_server_bytes - base.measured.inter_server_bytes == inter_k_slope;
    detail("S=%d linear scaling: client +%zu for d 16->48, inter +%zu for d 16->48, +%zu for k 16->40  %s", S,
           client_slope, inter_d_slope, inter_k_slope, pass ? "ok" : "FAILED");
    ok = ok && pass;
  }
  return ok;
}

// 11: a scenario run is a deterministic function of its seed.
bool determinism() {
  Scenario s = shape(8, 1, 3, 64, 64);
  s.partial_send = 1;
  s.adversary_pattern = MassPattern::concentrated;
  s.validity_threshold = 0.5;
  const ProtocolParams p = calibrate_scenario(s).params;
  const ScenarioRun a = run_scenario(s, p, 42);
  const ScenarioRun b = run_scenario(s, p, 42);
  const ScenarioRun c = run_scenario(s, p, 43);
  bool same = a.transcript.messages.size() == b.transcript.messages.size();
  for (std::size_t i = 0; same && i < a.transcript.messages.size(); ++i) {
    same = a.transcript.messages[i].payload == b.transcript.messages[i].payload;
  }
  const bool pass = same && a.transcript.digest() == b.transcript.digest() &&
                    a.transcript.digest() != c.transcript.digest() && *a.result.sum == *b.result.sum;
  detail("seed 42 transcript sha256 %s (twice), seed 43 %s", a.transcript.digest().c_str(),
         c.transcript.digest().c_str());
  return pass;
}

struct Criterion {
  int id;
  const char* name;
  std::function<bool()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "completeness", completeness},
      {2, "soundness", soundness},
      {3, "robustness", robustness},
      {4, "correctness", correctness},
      {5, "exact simulation of coalition views", exact_simulation},
      {6, "Gaussian mechanism privacy", gaussian_mechanism},
      {7, "noisy projection privacy", projection_privacy},
      {8, "chi-square tail bounds", chi2_tails},
      {9, "share truncation", truncation},
      {10, "communication cost", communication},
      {11, "determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  std::vector<std::string> summary;
  bool all = true;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    std::printf("criterion %d: %s\n", c.id, c.name);
    std::fflush(stdout);
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    try {
      pass = c.run();
    } catch (const std::exception& e) {
      detail("exception: %s", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char line[160];
    std::snprintf(line, sizeof line, "%s criterion %2d: %s (%.1f s)", pass ? "PASS" : "FAIL", c.id, c.name, secs);
    std::printf("%s\n", line);
    std::fflush(stdout);
    summary.emplace_back(line);
    all = all && pass;
  }
  std::printf("\nsummary\n");
  for (const std::string& s : summary) std::printf("%s\n", s.c_str());
  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
