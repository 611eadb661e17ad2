#include "secagg/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "secagg/error.hpp"
#include "secagg/kernels.hpp"
#include "secagg/rng.hpp"

namespace secagg {

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::completeness: return "completeness";
    case ExperimentKind::soundness: return "soundness";
    case ExperimentKind::robustness: return "robustness";
    case ExperimentKind::correctness: return "correctness";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  for (auto k : {ExperimentKind::completeness, ExperimentKind::soundness, ExperimentKind::robustness,
                 ExperimentKind::correctness}) {
    if (text == to_string(k)) return k;
  }
  throw Error(ErrorCode::config_invalid, "unknown experiment kind '" + std::string(text) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view axis, std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw Error(ErrorCode::config_invalid,
                "grid axis " + std::string(axis) + ": bad value '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::vector<GridPoint> parse_grid(std::string_view text, const GridPoint& defaults) {
  std::vector<int> ks{defaults.k}, Ss{defaults.S}, ds{defaults.d};
  std::vector<double> betas{defaults.beta};
  bool any = false;
  for (std::string_view part : split(text, ';')) {
    if (part.empty()) continue;
    const std::size_t eq = part.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::config_invalid, "grid entry '" + std::string(part) + "' lacks '='");
    }
    const std::string_view axis = trim(part.substr(0, eq));
    std::vector<std::string_view> values = split(part.substr(eq + 1), ',');
    std::erase_if(values, [](std::string_view v) { return v.empty(); });
    if (values.empty()) {
      throw Error(ErrorCode::config_invalid, "grid axis " + std::string(axis) + " has no values");
    }
    if (axis == "k" || axis == "S" || axis == "d") {
      std::vector<int>& dst = axis == "k" ? ks : axis == "S" ? Ss : ds;
      dst.clear();
      for (auto v : values) dst.push_back(parse_number<int>(axis, v));
    } else if (axis == "beta") {
      betas.clear();
      for (auto v : values) betas.push_back(parse_number<double>(axis, v));
    } else {
      throw Error(ErrorCode::config_invalid, "unknown grid axis '" + std::string(axis) + "'");
    }
    any = true;
  }
  if (!any) throw Error(ErrorCode::config_invalid, "empty grid");

  std::vector<GridPoint> grid;
  for (int k : ks)
    for (int S : Ss)
      for (int d : ds)
        for (double beta : betas) grid.push_back({k, S, d, beta});
  return grid;
}

ProtocolParams grid_params(const GridPoint& point, const ExperimentOptions& options,
                           bool allow_vacuous_soundness, int n) {
  CalibrationInputs in;
  in.eps = options.eps;
  in.delta = options.delta;
  in.eps_ss = options.eps;
  in.delta_ss = options.delta;
  in.beta = point.beta;
  in.S = point.S;
  in.k = point.k;
  in.d = point.d;
  in.n = n;
  CalibrationOptions copt;
  copt.mode = options.mode;
  try {
    return calibrate(in, copt).params;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::infeasible_parameters || !allow_vacuous_soundness) throw;
  }
  // Completeness needs only tau; calibrate the rest at a feasible beta and
  // then restore the requested one.
  CalibrationInputs feasible = in;
  feasible.beta = 0.5;
  ProtocolParams p = calibrate(feasible, copt).params;
  p.beta = point.beta;
  p.tau = completeness_threshold(point.k, point.S, p.sigma_v, point.beta, options.mode);
  p.rho = std::numeric_limits<double>::infinity();
  return p;
}

namespace {

Scenario population(const GridPoint& point, const ExperimentOptions& options, int honest,
                    int adversaries) {
  Scenario s;
  s.calibration.eps = options.eps;
  s.calibration.delta = options.delta;
  s.calibration.eps_ss = options.eps;
  s.calibration.delta_ss = options.delta;
  s.calibration.beta = point.beta;
  s.calibration.S = point.S;
  s.calibration.k = point.k;
  s.calibration.d = point.d;
  s.calibration.n = honest + adversaries;
  s.threshold_mode = options.mode;
  s.honest = honest;
  s.norm_inflating = adversaries;
  s.adversary_norm = options.norm_factor;
  s.adversary_norm_in_rho = true;
  s.adversary_pattern = options.pattern;
  return s;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t t) {
  return derive_seed(seed, StreamTag::trial, {static_cast<std::uint64_t>(t)});
}

}  // namespace

ExperimentRow run_experiment(ExperimentKind kind, const GridPoint& point,
                             const ExperimentOptions& options) {
  require(options.trials >= 1, ErrorCode::invalid_parameter, "trials must be >= 1");
  ExperimentRow row;
  row.kind = kind;
  row.point = point;
  row.options = options;

  switch (kind) {
    case ExperimentKind::completeness: {
      const ProtocolParams p = grid_params(point, options, true);
      row.options.pattern = MassPattern::random;
      row.tau = p.tau;
      row.rho = p.rho;
      row.estimate = accept_rate(fixed_norm_bundles(p, 1.0, MassPattern::random), p, options.trials,
                                 options.seed);
      row.bound = 1.0 - point.beta;
      row.pass = row.estimate.at_least(row.bound);
      break;
    }
    case ExperimentKind::soundness: {
      const ProtocolParams p = grid_params(point, options, false);
      row.tau = p.tau;
      row.rho = p.rho;
      row.estimate = accept_rate(fixed_norm_bundles(p, options.norm_factor * p.rho, options.pattern),
                                 p, options.trials, options.seed);
      row.bound = point.beta;
      row.pass = row.estimate.at_most(row.bound);
      break;
    }
    case ExperimentKind::robustness: {
      require(options.n >= 2, ErrorCode::invalid_parameter, "robustness needs n >= 2");
      const Scenario with = population(point, options, options.n - 1, 1);
      const Scenario without = with.without_adversaries();
      const ProtocolParams p = grid_params(point, options, false, options.n);
      row.tau = p.tau;
      row.rho = p.rho;
      std::vector<char> hit(static_cast<std::size_t>(options.trials), 0);
      std::vector<double> shift(hit.size(), -1.0);
      kernels::for_each_index(hit.size(), [&](std::size_t t) {
        const std::uint64_t seed = trial_seed(options.seed, t);
        const ScenarioRun run = run_scenario(with, p, seed);
        const ClientRecord& adv = run.clients.back();
        const bool accepted = run.result.accepted_contains(adv.id);
        hit[t] = accepted && adv.share_sum.norm() > p.rho ? 1 : 0;
        if (!accepted) {
          const ScenarioRun honest_only = run_scenario(without, p, seed);
          shift[t] = robustness_delta(run.result, honest_only.result);
        }
      });
      row.estimate = binomial_estimate(std::count(hit.begin(), hit.end(), 1), options.trials);
      for (double s : shift) {
        if (s < 0) continue;
        row.max_deviation = std::max(row.max_deviation, s);
        ++row.deviation_sessions;
      }
      row.bound = point.beta;
      row.pass = row.estimate.at_most(row.bound) && row.max_deviation == 0.0;
      break;
    }
    case ExperimentKind::correctness: {
      const Scenario s = population(point, options, options.n, 0);
      const ProtocolParams p = grid_params(point, options, true, options.n);
      row.tau = p.tau;
      row.rho = p.rho;
      std::vector<char> hit(static_cast<std::size_t>(options.trials), 0);
      std::vector<double> error(hit.size(), -1.0);
      kernels::for_each_index(hit.size(), [&](std::size_t t) {
        const ScenarioRun run = run_scenario(s, p, trial_seed(options.seed, t));
        if (run.result.accepted.size() != static_cast<std::size_t>(options.n)) return;
        hit[t] = 1;
        error[t] = distance(*run.result.sum, run.accepted_input_sum());
      });
      row.estimate = binomial_estimate(std::count(hit.begin(), hit.end(), 1), options.trials);
      for (double e : error) {
        if (e < 0) continue;
        row.max_deviation = std::max(row.max_deviation, e);
        ++row.deviation_sessions;
      }
      row.bound = std::max(0.0, 1.0 - options.n * point.beta);
      row.pass = row.estimate.at_least(row.bound) && row.max_deviation <= 1e-6;
      break;
    }
  }
  return row;
}

void write_experiment_csv(std::ostream& out, std::span<const ExperimentRow> rows) {
  out << "# schema: " << kExperimentSchema << "\n";
  out << "kind,k,S,d,beta,n,norm_factor,pattern,trials,seed,tau,rho,events,rate,standard_error,"
         "ci_low,ci_high,bound,max_deviation,verdict\n";
  char buf[512];
  for (const ExperimentRow& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%s,%d,%d,%d,%.10g,%d,%.10g,%s,%lld,%llu,%.10g,%.10g,%lld,%.10g,%.10g,%.10g,%.10g,"
                  "%.10g,%.10g,%s\n",
                  to_string(r.kind).c_str(), r.point.k, r.point.S, r.point.d, r.point.beta,
                  r.kind == ExperimentKind::robustness || r.kind == ExperimentKind::correctness
                      ? r.options.n
                      : 1,
                  r.options.norm_factor, to_string(r.options.pattern).c_str(),
                  static_cast<long long>(r.estimate.trials),
                  static_cast<unsigned long long>(r.options.seed), r.tau, r.rho,
                  static_cast<long long>(r.estimate.events), r.estimate.rate,
                  r.estimate.standard_error, r.estimate.ci_low, r.estimate.ci_high, r.bound,
                  r.max_deviation, r.pass ? "pass" : "fail");
    out << buf;
  }
}

}  // namespace secagg
