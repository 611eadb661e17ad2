#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "secagg/core_math.hpp"
#include "secagg/norm_verification.hpp"
#include "secagg/secret_sharing.hpp"
#include "secagg/transcript.hpp"

namespace secagg {

enum class ClientBehavior { honest, norm_inflating, inconsistent_shares, partial_send };

std::string to_string(ClientBehavior behavior);
ClientBehavior parse_client_behavior(std::string_view text);

/// What one prover hands to the verifiers. payloads[i] is the share for
/// verifier i; an empty slot means nothing was sent to that verifier.
struct ClientSubmission {
  ClientId client_id;
  std::vector<std::optional<RealVector>> payloads;
  ClientBehavior behavior = ClientBehavior::honest;
};

ClientSubmission submission_from_bundle(const ShareBundle& bundle,
                                        ClientBehavior behavior = ClientBehavior::honest);

struct AggregateResult {
  std::optional<RealVector> sum;  // absent iff aborted
  std::vector<ClientId> reached_all;  // J: clients every verifier heard from
  std::vector<ClientId> accepted;     // J*, in submission order
  bool aborted = false;
  std::map<ClientId, VerificationOutcome> per_client_outcomes;

  bool accepted_contains(std::string_view id) const;
};

/// Decides, from J* and the number of submitting clients, whether to go on.
using ValidityPredicate = std::function<bool(std::span<const ClientId> accepted, int n)>;

/// |J*| >= threshold_fraction * n.
bool validity_check(std::size_t accepted_count, int n, double threshold_fraction);
ValidityPredicate size_threshold(double threshold_fraction);

struct AggregationOptions {
  WMode w_mode = WMode::shared;
  std::optional<ValidityPredicate> validity;
  // When set, every verifier adds N(0, sigma^2 I_d) to its partial sum.
  std::optional<double> output_noise_sigma;
};

struct AggregationRun {
  AggregateResult result;
  Transcript transcript;
};

/// Robust secure aggregation over the message bus:
///   round 0  clients -> verifiers   shares
///   round 1  V0 -> Vi               projection matrix
///   round 2  Vi -> V0               batched noisy projections for J_i
///   round 3  V0 -> Vi               J*
///   round 4  Vi -> V0               partial sums (skipped on abort)
/// Throws duplicate-client-id when two submissions share an id.
AggregationRun run_aggregation(std::span<const ClientSubmission> submissions,
                               const ProtocolParams& params, std::uint64_t seed,
                               const AggregationOptions& options = {});

/// ||sum_with - sum_without||; throws aborted-input or dimension-mismatch.
double robustness_delta(const AggregateResult& with, const AggregateResult& without);

}  // namespace secagg
