#include "secagg/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "secagg/error.hpp"
#include "secagg/rng.hpp"

namespace secagg {

std::string to_string(MassPattern pattern) {
  switch (pattern) {
    case MassPattern::spread: return "spread";
    case MassPattern::concentrated: return "concentrated";
    case MassPattern::random: return "random";
  }
  return "unknown";
}

MassPattern parse_mass_pattern(std::string_view text) {
  for (auto p : {MassPattern::spread, MassPattern::concentrated, MassPattern::random}) {
    if (text == to_string(p)) return p;
  }
  throw Error(ErrorCode::invalid_parameter, "unknown mass pattern '" + std::string(text) + "'");
}

Scenario Scenario::without_adversaries() const {
  Scenario s = *this;
  s.norm_inflating = s.inconsistent_shares = s.partial_send = 0;
  return s;
}

void Scenario::validate() const {
  auto check = [](bool ok, const std::string& what) {
    require(ok, ErrorCode::scenario_invalid, what);
  };
  const int S = calibration.S;
  check(S >= 2, "S must be >= 2");
  check(calibration.d >= 1 && calibration.k >= 1, "d and k must be >= 1");
  check(honest >= 0 && norm_inflating >= 0 && inconsistent_shares >= 0 && partial_send >= 0,
        "client counts must be >= 0");
  check(n() >= 1, "scenario needs at least one client");
  check(honest_norm >= 0 && adversary_norm >= 0, "norms must be >= 0");
  check(!validity_threshold || (*validity_threshold > 0 && *validity_threshold <= 1),
        "validity_threshold must be in (0, 1]");
  check(static_cast<int>(coalition.size()) < S, "coalition must exclude at least one verifier");
  for (int i : coalition) check(i >= 0 && i < S, "coalition index out of range");
  check(trials >= 1, "trials must be >= 1");
  check(quant_step > 0, "quant_step must be > 0");
  check(!trunc_B || *trunc_B > 0, "trunc_B must be > 0");
  check(!output_noise_sigma || *output_noise_sigma > 0, "output_noise_sigma must be > 0");
}

namespace {

namespace pt = boost::property_tree;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const VerifierSet& set) {
  std::string out;
  for (int i : set) {
    if (!out.empty()) out += ",";
    out += std::to_string(i);
  }
  return out;
}

VerifierSet parse_set(const std::string& text) {
  VerifierSet out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    const int v = std::stoi(item, &used);
    out.insert(v);
  }
  return out;
}

const std::set<std::string> kProtocolKeys{
    "S", "d", "k", "eps", "delta", "eps_ss", "delta_ss", "beta", "threshold_mode",
    "session_calibrated", "w_mode", "trunc_B", "quant_step", "output_noise_sigma"};
const std::set<std::string> kClientKeys{
    "honest", "honest_norm", "norm_inflating", "inconsistent_shares", "partial_send",
    "adversary_norm", "adversary_norm_unit", "adversary_pattern"};
const std::set<std::string> kSessionKeys{"validity_threshold", "coalition", "trials"};

void check_keys(const pt::ptree& section, const std::set<std::string>& allowed,
                const std::string& name) {
  for (const auto& [key, value] : section) {
    require(allowed.contains(key), ErrorCode::config_invalid,
            "unknown key '" + key + "' in [" + name + "]");
  }
}

// Unlike ptree::get(path, default), a present but malformed value throws.
template <class T>
T value(const pt::ptree& tree, const std::string& path, T fallback) {
  return tree.get_child_optional(path) ? tree.get<T>(path) : fallback;
}

template <class T>
std::optional<T> optional_value(const pt::ptree& tree, const std::string& path) {
  auto v = tree.get_optional<std::string>(path);
  if (!v || v->empty()) return std::nullopt;
  return tree.get<T>(path);
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::config_invalid, e.what());
  }
  const auto schema = tree.get_optional<std::string>("schema");
  require(schema && *schema == kScenarioSchema, ErrorCode::config_invalid,
          "missing or unsupported schema (expected " + std::string(kScenarioSchema) + ")");
  for (const auto& [key, value] : tree) {
    require(key == "schema" || key == "protocol" || key == "clients" || key == "session",
            ErrorCode::config_invalid, "unknown top-level entry '" + key + "'");
  }

  Scenario s;
  try {
    const pt::ptree empty;
    const pt::ptree& proto = tree.get_child("protocol", empty);
    const pt::ptree& clients = tree.get_child("clients", empty);
    const pt::ptree& session = tree.get_child("session", empty);
    check_keys(proto, kProtocolKeys, "protocol");
    check_keys(clients, kClientKeys, "clients");
    check_keys(session, kSessionKeys, "session");

    CalibrationInputs& c = s.calibration;
    c.S = value(proto, "S", c.S);
    c.d = value(proto, "d", 64);
    c.k = value(proto, "k", c.k);
    c.eps = value(proto, "eps", c.eps);
    c.delta = value(proto, "delta", c.delta);
    c.eps_ss = value(proto, "eps_ss", c.eps);
    c.delta_ss = value(proto, "delta_ss", c.delta);
    c.beta = value(proto, "beta", c.beta);
    const std::string mode = value<std::string>(proto, "threshold_mode", "tail-bound");
    require(mode == "tail-bound" || mode == "exact-cdf", ErrorCode::config_invalid,
            "threshold_mode must be tail-bound or exact-cdf");
    s.threshold_mode = mode == "exact-cdf" ? ThresholdMode::exact_cdf : ThresholdMode::tail_bound;
    s.session_calibrated = value(proto, "session_calibrated", false);
    s.w_mode = parse_w_mode(value<std::string>(proto, "w_mode", "shared"));
    s.trunc_B = optional_value<double>(proto, "trunc_B");
    s.quant_step = value(proto, "quant_step", 1.0);
    s.output_noise_sigma = optional_value<double>(proto, "output_noise_sigma");

    s.honest = value(clients, "honest", s.honest);
    s.honest_norm = value(clients, "honest_norm", s.honest_norm);
    s.norm_inflating = value(clients, "norm_inflating", 0);
    s.inconsistent_shares = value(clients, "inconsistent_shares", 0);
    s.partial_send = value(clients, "partial_send", 0);
    s.adversary_norm = value(clients, "adversary_norm", s.adversary_norm);
    const std::string unit = value<std::string>(clients, "adversary_norm_unit", "rho");
    require(unit == "rho" || unit == "absolute", ErrorCode::config_invalid,
            "adversary_norm_unit must be rho or absolute");
    s.adversary_norm_in_rho = unit == "rho";
    s.adversary_pattern = parse_mass_pattern(value<std::string>(clients, "adversary_pattern", "spread"));

    s.validity_threshold = optional_value<double>(session, "validity_threshold");
    s.coalition = parse_set(value<std::string>(session, "coalition", "1"));
    s.trials = value(session, "trials", 1);
  } catch (const pt::ptree_error& e) {
    throw Error(ErrorCode::config_invalid, e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::config_invalid, std::string("bad number: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config_invalid) throw;
    throw Error(ErrorCode::config_invalid, e.what());
  }
  s.calibration.n = s.n();
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::config_invalid, e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::config_invalid, "cannot open scenario file '" + path + "'");
  return parse_scenario(in);
}

void write_scenario(std::ostream& out, const Scenario& s) {
  const CalibrationInputs& c = s.calibration;
  out << "schema = " << kScenarioSchema << "\n\n[protocol]\n"
      << "S = " << c.S << "\nd = " << c.d << "\nk = " << c.k << "\neps = " << num(c.eps)
      << "\ndelta = " << num(c.delta) << "\neps_ss = " << num(c.eps_ss)
      << "\ndelta_ss = " << num(c.delta_ss) << "\nbeta = " << num(c.beta)
      << "\nthreshold_mode = " << to_string(s.threshold_mode)
      << "\nsession_calibrated = " << (s.session_calibrated ? "true" : "false")
      << "\nw_mode = " << to_string(s.w_mode) << "\n";
  if (s.trunc_B) out << "trunc_B = " << num(*s.trunc_B) << "\n";
  out << "quant_step = " << num(s.quant_step) << "\n";
  if (s.output_noise_sigma) out << "output_noise_sigma = " << num(*s.output_noise_sigma) << "\n";
  out << "\n[clients]\nhonest = " << s.honest << "\nhonest_norm = " << num(s.honest_norm)
      << "\nnorm_inflating = " << s.norm_inflating
      << "\ninconsistent_shares = " << s.inconsistent_shares
      << "\npartial_send = " << s.partial_send << "\nadversary_norm = " << num(s.adversary_norm)
      << "\nadversary_norm_unit = " << (s.adversary_norm_in_rho ? "rho" : "absolute")
      << "\nadversary_pattern = " << to_string(s.adversary_pattern) << "\n\n[session]\n";
  if (s.validity_threshold) out << "validity_threshold = " << num(*s.validity_threshold) << "\n";
  out << "coalition = " << join(s.coalition) << "\ntrials = " << s.trials << "\n";
}

CalibrationReport calibrate_scenario(const Scenario& s) {
  s.validate();
  CalibrationInputs in = s.calibration;
  in.n = s.n();
  CalibrationReport r = calibrate(in, {s.threshold_mode, s.session_calibrated});
  r.params.trunc_B = s.trunc_B;
  r.params.quant_step = s.quant_step;
  r.params.validate();
  return r;
}

RealVector ScenarioRun::accepted_input_sum() const {
  RealVector sum(transcript.params.d);
  for (const ClientRecord& c : clients) {
    if (result.accepted_contains(c.id)) sum += c.input;
  }
  return sum;
}

std::vector<ClientId> client_nonces(std::uint64_t master_seed, int count) {
  std::vector<ClientId> ids;
  std::set<ClientId> taken;
  for (int i = 0; i < count; ++i) {
    for (std::uint64_t attempt = 0;; ++attempt) {
      char buf[17];
      std::snprintf(buf, sizeof buf, "%016llx",
                    static_cast<unsigned long long>(derive_seed(
                        master_seed, StreamTag::client_nonce, {static_cast<std::uint64_t>(i), attempt})));
      if (taken.insert(buf).second) {
        ids.emplace_back(buf);
        break;
      }
    }
  }
  return ids;
}

namespace {

RealVector random_direction(std::size_t d, Rng& rng) {
  RealVector v(d);
  double norm = 0.0;
  while (norm == 0.0) {
    rng.fill_gaussian(v.values(), 1.0);
    norm = v.norm();
  }
  return (1.0 / norm) * std::move(v);
}

RealVector offset_vector(std::size_t d, double norm, MassPattern pattern, Rng& rng) {
  RealVector v(d);
  switch (pattern) {
    case MassPattern::spread:
      for (std::size_t i = 0; i < d; ++i) v[i] = norm / std::sqrt(static_cast<double>(d));
      break;
    case MassPattern::concentrated:
      v[0] = norm;
      break;
    case MassPattern::random:
      v = norm * random_direction(d, rng);
      break;
  }
  return v;
}

}  // namespace

ClientSubmission make_submission(ClientBehavior behavior, const ClientId& id,
                                 const RealVector& input, const ProtocolParams& params,
                                 double adversary_norm, MassPattern pattern, std::uint64_t seed,
                                 RealVector* share_sum) {
  const auto d = static_cast<std::size_t>(params.d);
  Rng offset_rng(derive_seed(seed, {2}));
  const std::uint64_t share_seed = derive_seed(seed, {1});
  ShareBundle bundle;
  switch (behavior) {
    case ClientBehavior::honest:
    case ClientBehavior::partial_send:
      bundle = share_vector(input, params.S, params.sigma_ss, share_seed, id);
      break;
    case ClientBehavior::norm_inflating:
      bundle = share_vector(offset_vector(d, adversary_norm, pattern, offset_rng), params.S,
                            params.sigma_ss, share_seed, id);
      break;
    case ClientBehavior::inconsistent_shares:
      bundle = share_vector(input, params.S, params.sigma_ss, share_seed, id);
      bundle.shares.back() += offset_vector(d, adversary_norm, pattern, offset_rng);
      break;
  }
  if (share_sum) *share_sum = reconstruct(bundle);
  ClientSubmission sub = submission_from_bundle(bundle, behavior);
  if (behavior == ClientBehavior::partial_send) sub.payloads.back().reset();
  return sub;
}

ScenarioRun run_scenario(const Scenario& s, const ProtocolParams& params, std::uint64_t master_seed) {
  s.validate();
  params.validate();
  require(params.S == s.calibration.S && params.d == s.calibration.d && params.k == s.calibration.k,
          ErrorCode::scenario_invalid, "params do not match the scenario's S, d, k");

  const int n = s.n();
  const std::vector<ClientId> ids = client_nonces(master_seed, n);
  const double adversary_norm = s.adversary_norm_in_rho ? s.adversary_norm * params.rho : s.adversary_norm;

  ScenarioRun run;
  std::vector<ClientSubmission> submissions;
  submissions.reserve(n);
  for (int idx = 0; idx < n; ++idx) {
    ClientBehavior behavior = ClientBehavior::honest;
    if (idx >= s.honest) behavior = ClientBehavior::norm_inflating;
    if (idx >= s.honest + s.norm_inflating) behavior = ClientBehavior::inconsistent_shares;
    if (idx >= s.honest + s.norm_inflating + s.inconsistent_shares) behavior = ClientBehavior::partial_send;

    const auto index = static_cast<std::uint64_t>(idx);
    Rng input_rng(derive_seed(master_seed, StreamTag::client_input, {index}));
    ClientRecord rec;
    rec.id = ids[idx];
    rec.behavior = behavior;
    rec.input = s.honest_norm * random_direction(params.d, input_rng);
    submissions.push_back(make_submission(behavior, rec.id, rec.input, params, adversary_norm,
                                          s.adversary_pattern,
                                          derive_seed(master_seed, StreamTag::client_shares, {index}),
                                          &rec.share_sum));
    if (behavior == ClientBehavior::norm_inflating) rec.input = rec.share_sum;
    run.clients.push_back(std::move(rec));
  }

  AggregationOptions options;
  options.w_mode = s.w_mode;
  if (s.validity_threshold) options.validity = size_threshold(*s.validity_threshold);
  options.output_noise_sigma = s.output_noise_sigma;

  AggregationRun agg = run_aggregation(submissions, params,
                                       derive_seed(master_seed, StreamTag::session), options);
  run.result = std::move(agg.result);
  run.transcript = std::move(agg.transcript);
  run.transcript.master_seed = master_seed;
  return run;
}

CommunicationPrediction predict_communication(const ProtocolParams& params, int n,
                                              std::size_t id_len, std::size_t accepted) {
  const auto S = static_cast<std::size_t>(params.S);
  const auto d = static_cast<std::size_t>(params.d);
  const auto k = static_cast<std::size_t>(params.k);
  const auto clients = static_cast<std::size_t>(n);
  const std::size_t share =
      params.trunc_B
          ? wire::size::quantized_share(
                id_len, d,
                wire::level_width(static_cast<std::int64_t>(std::floor(*params.trunc_B / params.quant_step))))
          : wire::size::share(id_len, d);
  CommunicationPrediction p;
  p.client_to_server = clients * S * share;
  const std::size_t per_link = wire::size::matrix(k, d) +
                               (4 + clients * (wire::size::id(id_len) + wire::size::vector(k))) +
                               (4 + accepted * wire::size::id(id_len)) + wire::size::vector(d);
  p.inter_server = (S - 1) * per_link;
  return p;
}

}  // namespace secagg
