#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "secagg/aggregation.hpp"
#include "secagg/core_math.hpp"
#include "secagg/norm_verification.hpp"

namespace secagg {

// Direction of an adversarial offset of norm a in R^d.
enum class MassPattern {
  spread,        // a / sqrt(d) in every coordinate
  concentrated,  // a in coordinate 0
  random,        // uniform direction from the client's stream
};

std::string to_string(MassPattern pattern);
MassPattern parse_mass_pattern(std::string_view text);

inline constexpr std::string_view kScenarioSchema = "secagg-scenario/1";

/// One simulated aggregation session. Clients are laid out honest first, then
/// norm-inflating, inconsistent-shares and partial-send adversaries, so
/// removing adversaries leaves every honest client's identity and randomness
/// unchanged.
struct Scenario {
  // Protocol shape and calibration.
  CalibrationInputs calibration;  // S, k, d, eps, delta, eps_ss, delta_ss, beta (n is derived)
  ThresholdMode threshold_mode = ThresholdMode::tail_bound;
  bool session_calibrated = false;
  WMode w_mode = WMode::shared;
  std::optional<double> trunc_B;
  double quant_step = 1.0;
  std::optional<double> output_noise_sigma;

  // Population.
  int honest = 10;
  double honest_norm = 1.0;
  int norm_inflating = 0;
  int inconsistent_shares = 0;
  int partial_send = 0;
  double adversary_norm = 3.0;
  bool adversary_norm_in_rho = true;  // adversary_norm is a multiple of rho
  MassPattern adversary_pattern = MassPattern::spread;

  // Session.
  std::optional<double> validity_threshold;
  VerifierSet coalition{1};
  int trials = 1;

  int n() const noexcept { return honest + norm_inflating + inconsistent_shares + partial_send; }
  int adversaries() const noexcept { return n() - honest; }
  Scenario without_adversaries() const;

  // Throws scenario-invalid.
  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Parses the key/value scenario file (INI sections [protocol], [clients],
/// [session]; top-level `schema` must equal kScenarioSchema). Throws
/// config-invalid.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::string& path);
void write_scenario(std::ostream& out, const Scenario& s);

/// Calibrated parameters for the scenario's population and options.
CalibrationReport calibrate_scenario(const Scenario& s);

struct ClientRecord {
  ClientId id;
  ClientBehavior behavior = ClientBehavior::honest;
  RealVector input;      // the vector the client claims to hold
  RealVector share_sum;  // sum of every payload it prepared
};

struct ScenarioRun {
  AggregateResult result;
  Transcript transcript;
  std::vector<ClientRecord> clients;

  // Sum of the inputs of the clients in J*.
  RealVector accepted_input_sum() const;
};

/// Collision-checked random nonces used as client identifiers.
std::vector<ClientId> client_nonces(std::uint64_t master_seed, int count);

/// Builds a client's submission. adversary_norm is absolute here.
ClientSubmission make_submission(ClientBehavior behavior, const ClientId& id,
                                 const RealVector& input, const ProtocolParams& params,
                                 double adversary_norm, MassPattern pattern, std::uint64_t seed,
                                 RealVector* share_sum = nullptr);

/// Executes the full protocol for the scenario over the message bus.
/// Deterministic in (scenario, params, master_seed).
ScenarioRun run_scenario(const Scenario& s, const ProtocolParams& params, std::uint64_t master_seed);

struct CommunicationPrediction {
  std::size_t client_to_server = 0;
  std::size_t inter_server = 0;
};

/// Closed-form byte counts for a session in which all n clients reach every
/// verifier, `accepted` of them pass, the session does not abort and all
/// client ids are id_len bytes long.
CommunicationPrediction predict_communication(const ProtocolParams& params, int n, std::size_t id_len,
                                              std::size_t accepted);

}  // namespace secagg
