// Command-line front end: calibration, single-client sharing and norm
// verification, scenario-driven aggregation, experiments and audits.
//
// Exit codes: 0 ok, 2 usage / configuration / infeasible parameters,
// 3 protocol abort, 1 unexpected internal failure.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "secagg/audit_suite.hpp"
#include "secagg/error.hpp"
#include "secagg/experiment.hpp"
#include "secagg/norm_verification.hpp"
#include "secagg/rng.hpp"
#include "secagg/scenario.hpp"
#include "secagg/secret_sharing.hpp"
#include "secagg/transcript.hpp"

namespace fs = std::filesystem;
using namespace secagg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAbort = 3;

std::string default_output_dir() {
  const char* env = std::getenv("SECAGG_OUTPUT_DIR");
  return env && *env ? env : "secagg-out";
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::config_invalid, "cannot write " + path.string());
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CalibrateArgs {
  CalibrationInputs in;
  std::optional<double> eps_ss;
  std::optional<double> delta_ss;
  bool exact_cdf = false;
  bool session_calibrated = false;
  std::string out;
};

void add_calibration_options(CLI::App* cmd, CalibrateArgs& a, bool required) {
  auto opt = [&](const char* name, auto& target, const char* help) {
    CLI::Option* o = cmd->add_option(name, target, help);
    if (required) o->required();
    return o;
  };
  opt("--eps", a.in.eps, "privacy epsilon of norm verification")->check(CLI::PositiveNumber);
  opt("--delta", a.in.delta, "privacy delta of norm verification")->check(CLI::Range(0.0, 1.0));
  opt("--beta", a.in.beta, "completeness/soundness failure probability")->check(CLI::Range(0.0, 1.0));
  opt("--S", a.in.S, "number of verifiers")->check(CLI::Range(2, 64));
  opt("--k", a.in.k, "projection dimension")->check(CLI::PositiveNumber);
  opt("--d", a.in.d, "input dimension")->check(CLI::PositiveNumber);
  cmd->add_option("--eps-ss", a.eps_ss, "secret-sharing epsilon (default: --eps)");
  cmd->add_option("--delta-ss", a.delta_ss, "secret-sharing delta (default: --delta)");
  cmd->add_option("--n", a.in.n, "number of clients")->check(CLI::PositiveNumber);
  cmd->add_flag("--exact-cdf", a.exact_cdf, "use exact chi-square quantiles instead of tail bounds");
  cmd->add_flag("--session-calibrated", a.session_calibrated,
                "calibrate each client's check at beta / n");
}

CalibrationReport run_calibration(CalibrateArgs a) {
  a.in.eps_ss = a.eps_ss.value_or(a.in.eps);
  a.in.delta_ss = a.delta_ss.value_or(a.in.delta);
  CalibrationOptions options;
  options.mode = a.exact_cdf ? ThresholdMode::exact_cdf : ThresholdMode::tail_bound;
  options.session_calibrated = a.session_calibrated;
  return calibrate(a.in, options);
}

int cmd_calibrate(const CalibrateArgs& a) {
  const CalibrationReport r = run_calibration(a);
  std::printf("mode = %s\n", to_string(r.mode).c_str());
  std::printf("effective_beta = %.17g\n", r.effective_beta);
  for (const DerivationStep& s : r.derivation_log) {
    std::printf("%s = %.17g  [%s]\n", s.name.c_str(), s.value, s.formula_id.c_str());
  }
  if (!a.out.empty()) {
    nlohmann::json j;
    j["params"] = r.params;
    j["mode"] = to_string(r.mode);
    j["effective_beta"] = r.effective_beta;
    j["c_delta"] = r.c_delta;
    j["rho_asymptotic_estimate"] = r.rho_asymptotic_estimate;
    for (const DerivationStep& s : r.derivation_log) {
      j["derivation"].push_back({{"name", s.name}, {"formula_id", s.formula_id}, {"value", s.value}});
    }
    open_output(a.out) << j.dump(2) << "\n";
  }
  return kExitOk;
}

struct ShareArgs {
  int d = 8;
  int S = 2;
  double eps_ss = 1.0;
  double delta_ss = 1e-5;
  double norm = 1.0;
  std::vector<double> x;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_share(const ShareArgs& a) {
  RealVector x;
  if (!a.x.empty()) {
    x = RealVector(a.x);
  } else {
    x = RealVector(a.d);
    Rng rng(derive_seed(a.seed, StreamTag::client_input));
    rng.fill_gaussian(x.values(), 1.0);
    x *= a.norm / x.norm();
  }
  const double sigma = gaussian_sigma(a.eps_ss, a.delta_ss, 1.0);
  const ShareBundle b = share_vector(x, a.S, sigma, derive_seed(a.seed, StreamTag::client_shares), "cli");
  std::printf("sigma_ss = %.17g\n", sigma);
  std::printf("input_norm = %.17g\n", x.norm());
  for (std::size_t i = 0; i < b.shares.size(); ++i) {
    std::printf("share[%zu]_norm = %.17g\n", i, b.shares[i].norm());
  }
  std::printf("reconstruction_error = %.17g\n", distance(reconstruct(b), x));
  if (!a.out.empty()) {
    std::ofstream out = open_output(a.out);
    out << "# schema: secagg-shares/1\nverifier,coordinate,value\n";
    for (std::size_t i = 0; i < b.shares.size(); ++i) {
      for (std::size_t c = 0; c < b.dim(); ++c) out << i << ',' << c << ',' << num(b.shares[i][c]) << '\n';
    }
  }
  return kExitOk;
}

struct VerifyArgs {
  CalibrateArgs calibration;
  double norm = 1.0;
  std::string pattern = "random";
  std::string w_mode = "shared";
  std::uint64_t seed = 1;
  std::string transcript;
};

int cmd_verify_norm(const VerifyArgs& a) {
  const ProtocolParams p = run_calibration(a.calibration).params;
  const BundleFactory bundles = fixed_norm_bundles(p, a.norm, parse_mass_pattern(a.pattern));
  const ShareBundle b = bundles(derive_seed(a.seed, StreamTag::client_shares));
  const NormVerificationRun run =
      run_norm_verification(b, p, derive_seed(a.seed, StreamTag::session), parse_w_mode(a.w_mode));
  std::printf("share_sum_norm = %.17g\n", reconstruct(b).norm());
  std::printf("tau = %.17g\n", p.tau);
  std::printf("rho = %.17g\n", p.rho);
  std::printf("v_norm = %.17g\n", run.outcome.v_norm);
  std::printf("accept = %s\n", run.outcome.accept ? "true" : "false");
  std::printf("transcript_sha256 = %s\n", run.transcript.digest().c_str());
  if (!a.transcript.empty()) {
    std::ofstream out = open_output(a.transcript);
    write_transcript(out, run.transcript, false);
  }
  return kExitOk;
}

struct AggregateArgs {
  std::string config;
  std::uint64_t seed = 1;
  std::string out_dir = default_output_dir();
  bool payloads = false;
};

int cmd_aggregate(const AggregateArgs& a) {
  const Scenario s = load_scenario(a.config);
  const CalibrationReport cal = calibrate_scenario(s);
  const ProtocolParams& p = cal.params;
  const fs::path dir = a.out_dir;
  fs::create_directories(dir);

  nlohmann::json summary;
  summary["params"] = p;
  summary["seed"] = a.seed;
  bool any_abort = false;
  for (int t = 0; t < s.trials; ++t) {
    const std::uint64_t seed =
        s.trials == 1 ? a.seed : derive_seed(a.seed, StreamTag::trial, {static_cast<std::uint64_t>(t)});
    const ScenarioRun run = run_scenario(s, p, seed);
    const std::string name = s.trials == 1 ? "transcript.ndjson" : "transcript-" + std::to_string(t) + ".ndjson";
    {
      std::ofstream out = open_output(dir / name);
      write_transcript(out, run.transcript, a.payloads);
    }
    const TrafficSummary traffic_bytes = traffic(run.transcript);
    nlohmann::json session;
    session["trial"] = t;
    session["master_seed"] = seed;
    session["transcript"] = name;
    session["transcript_sha256"] = run.transcript.digest();
    session["clients"] = s.n();
    session["reached_all"] = run.result.reached_all.size();
    session["accepted"] = run.result.accepted.size();
    session["aborted"] = run.result.aborted;
    session["client_to_server_bytes"] = traffic_bytes.client_to_server_bytes;
    session["inter_server_bytes"] = traffic_bytes.inter_server_bytes;
    for (const ClientRecord& c : run.clients) {
      session["clients_detail"].push_back({{"id", c.id},
                                           {"behavior", to_string(c.behavior)},
                                           {"share_sum_norm", c.share_sum.norm()},
                                           {"accepted", run.result.accepted_contains(c.id)}});
    }
    if (run.result.sum) {
      session["sum_norm"] = run.result.sum->norm();
      session["error_vs_accepted_inputs"] = distance(*run.result.sum, run.accepted_input_sum());
    }
    std::printf("trial %d: accepted %zu/%d, %s, sha256 %s\n", t, run.result.accepted.size(), s.n(),
                run.result.aborted ? "aborted" : "completed", run.transcript.digest().c_str());
    any_abort = any_abort || run.result.aborted;
    summary["sessions"].push_back(std::move(session));
  }
  open_output(dir / "summary.json") << summary.dump(2) << "\n";
  std::printf("wrote %s\n", (dir / "summary.json").string().c_str());
  return any_abort ? kExitAbort : kExitOk;
}

struct ExperimentArgs {
  std::string kind;
  std::string grid;
  ExperimentOptions options;
  std::string pattern = "spread";
  bool exact_cdf = false;
  std::string out;
  std::string out_dir = default_output_dir();
};

int cmd_experiment(ExperimentArgs a) {
  const ExperimentKind kind = parse_experiment_kind(a.kind);
  const std::vector<GridPoint> grid = parse_grid(a.grid);
  a.options.pattern = parse_mass_pattern(a.pattern);
  a.options.mode = a.exact_cdf ? ThresholdMode::exact_cdf : ThresholdMode::tail_bound;
  std::vector<ExperimentRow> rows;
  for (const GridPoint& g : grid) rows.push_back(run_experiment(kind, g, a.options));
  write_experiment_csv(std::cout, rows);
  const fs::path path = a.out.empty() ? fs::path(a.out_dir) / ("experiment-" + a.kind + ".csv") : fs::path(a.out);
  std::ofstream out = open_output(path);
  write_experiment_csv(out, rows);
  std::fprintf(stderr, "wrote %s\n", path.string().c_str());
  return kExitOk;
}

struct AuditArgs {
  AuditSuiteOptions options;
  std::string out;
  std::string out_dir = default_output_dir();
};

int cmd_audit(const AuditArgs& a) {
  const std::vector<AuditRow> rows = run_audit_suite(a.options);
  write_audit_csv(std::cout, rows);
  const fs::path path = a.out.empty() ? fs::path(a.out_dir) / "audit.csv" : fs::path(a.out);
  std::ofstream out = open_output(path);
  write_audit_csv(out, rows);
  std::size_t passed = 0;
  for (const AuditRow& r : rows) passed += r.pass ? 1 : 0;
  std::fprintf(stderr, "%zu/%zu checks passed; wrote %s\n", passed, rows.size(), path.string().c_str());
  return kExitOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::protocol_abort:
    case ErrorCode::aborted_input:
      return kExitAbort;
    default:
      return kExitUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure aggregation with private norm verification"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  CalibrateArgs calibrate_args;
  CLI::App* calibrate_cmd = app.add_subcommand("calibrate", "derive noise scales, tau and rho");
  add_calibration_options(calibrate_cmd, calibrate_args, true);
  calibrate_cmd->add_option("--out", calibrate_args.out, "also write the report as JSON");

  ShareArgs share_args;
  CLI::App* share_cmd = app.add_subcommand("share", "secret-share one vector");
  share_cmd->add_option("--d", share_args.d, "dimension of the random input")->check(CLI::PositiveNumber);
  share_cmd->add_option("--x", share_args.x, "explicit input coordinates (overrides --d)")->delimiter(',');
  share_cmd->add_option("--norm", share_args.norm, "norm of the random input");
  share_cmd->add_option("--S", share_args.S, "number of verifiers")->check(CLI::Range(2, 64));
  share_cmd->add_option("--eps-ss", share_args.eps_ss, "secret-sharing epsilon")->check(CLI::PositiveNumber);
  share_cmd->add_option("--delta-ss", share_args.delta_ss, "secret-sharing delta")->check(CLI::Range(0.0, 1.0));
  share_cmd->add_option("--seed", share_args.seed, "master seed");
  share_cmd->add_option("--out", share_args.out, "write the shares as CSV");

  VerifyArgs verify_args;
  CLI::App* verify_cmd = app.add_subcommand("verify-norm", "run norm verification for one client");
  add_calibration_options(verify_cmd, verify_args.calibration, false);
  verify_cmd->add_option("--norm", verify_args.norm, "norm of the shared vector");
  verify_cmd->add_option("--pattern", verify_args.pattern, "mass pattern: spread|concentrated|random");
  verify_cmd->add_option("--w-mode", verify_args.w_mode, "projection source: shared|verifier0");
  verify_cmd->add_option("--seed", verify_args.seed, "master seed");
  verify_cmd->add_option("--transcript", verify_args.transcript, "write the transcript as NDJSON");

  AggregateArgs aggregate_args;
  CLI::App* aggregate_cmd = app.add_subcommand("aggregate", "run the aggregation scenario in a config file");
  aggregate_cmd->add_option("--config", aggregate_args.config, "scenario file")->required()->check(CLI::ExistingFile);
  aggregate_cmd->add_option("--seed", aggregate_args.seed, "master seed");
  aggregate_cmd->add_option("--out-dir", aggregate_args.out_dir, "output directory (env SECAGG_OUTPUT_DIR)");
  aggregate_cmd->add_flag("--payloads", aggregate_args.payloads, "include payload hex in the transcript");

  ExperimentArgs experiment_args;
  CLI::App* experiment_cmd = app.add_subcommand("experiment", "Monte Carlo rates over a parameter grid");
  experiment_cmd->add_option("--kind", experiment_args.kind, "completeness|soundness|robustness|correctness")
      ->required();
  experiment_cmd->add_option("--grid", experiment_args.grid, "e.g. \"k=16,64;S=2,3;d=32;beta=0.05\"")->required();
  experiment_cmd->add_option("--trials", experiment_args.options.trials, "trials per grid point")
      ->check(CLI::PositiveNumber);
  experiment_cmd->add_option("--seed", experiment_args.options.seed, "master seed");
  experiment_cmd->add_option("--eps", experiment_args.options.eps, "privacy epsilon")->check(CLI::PositiveNumber);
  experiment_cmd->add_option("--delta", experiment_args.options.delta, "privacy delta")->check(CLI::Range(0.0, 1.0));
  experiment_cmd->add_option("--norm-factor", experiment_args.options.norm_factor,
                             "adversarial norm as a multiple of rho");
  experiment_cmd->add_option("--pattern", experiment_args.pattern, "adversarial mass pattern");
  experiment_cmd->add_option("--n", experiment_args.options.n, "clients for robustness/correctness")
      ->check(CLI::PositiveNumber);
  experiment_cmd->add_flag("--exact-cdf", experiment_args.exact_cdf, "exact chi-square quantiles");
  experiment_cmd->add_option("--out", experiment_args.out, "CSV path (default <out-dir>/experiment-<kind>.csv)");
  experiment_cmd->add_option("--out-dir", experiment_args.out_dir, "output directory (env SECAGG_OUTPUT_DIR)");

  AuditArgs audit_args;
  CLI::App* audit_cmd = app.add_subcommand("audit", "statistical privacy and tail-bound audit");
  audit_cmd->add_option("--privacy-samples", audit_args.options.privacy_samples, "privacy-loss samples")
      ->check(CLI::Range(std::int64_t{1000}, std::int64_t{1} << 40));
  audit_cmd->add_option("--chi2-samples", audit_args.options.chi2_samples, "chi-square samples")
      ->check(CLI::PositiveNumber);
  audit_cmd->add_option("--simulation-samples", audit_args.options.simulation_samples,
                        "views per side in the simulation tests")
      ->check(CLI::PositiveNumber);
  audit_cmd->add_option("--seed", audit_args.options.seed, "master seed");
  audit_cmd->add_option("--out", audit_args.out, "CSV path (default <out-dir>/audit.csv)");
  audit_cmd->add_option("--out-dir", audit_args.out_dir, "output directory (env SECAGG_OUTPUT_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*calibrate_cmd) return cmd_calibrate(calibrate_args);
    if (*share_cmd) return cmd_share(share_args);
    if (*verify_cmd) return cmd_verify_norm(verify_args);
    if (*aggregate_cmd) return cmd_aggregate(aggregate_args);
    if (*experiment_cmd) return cmd_experiment(experiment_args);
    if (*audit_cmd) return cmd_audit(audit_args);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}
