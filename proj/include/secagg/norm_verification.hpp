#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string_view>

#include "secagg/core_math.hpp"
#include "secagg/secret_sharing.hpp"
#include "secagg/transcript.hpp"

namespace secagg {

/// Where the session's projection matrix comes from. `shared` derives W from
/// randomness every verifier can recompute, so verifier 0 cannot pick it.
enum class WMode { verifier0, shared };

std::string to_string(WMode mode);
WMode parse_w_mode(std::string_view text);

struct ProjectionReply {
  ClientId client_id;
  int verifier_index = 1;
  RealVector y;  // W z_i + N(0, sigma_v^2 I_k)
};

/// Verifier 0's decision. accept == (v_norm < tau): a norm exactly at tau
/// is rejected.
struct VerificationOutcome {
  ClientId client_id;
  bool accept = false;
  double v_norm = 0.0;
  double tau = 0.0;
};

// Per-session randomness layout.
std::uint64_t projection_seed(std::uint64_t session_seed, WMode mode);
std::uint64_t verifier_noise_seed(std::uint64_t session_seed, int verifier, std::string_view client_id);
ProjectionMatrix session_projection(std::uint64_t session_seed, int k, int d, WMode mode);

/// y = W z + fresh N(0, sigma_v^2 I_k), deterministic in seed.
ProjectionReply project_reply(const RealVector& z, const ProjectionMatrix& W, double sigma_v,
                              std::uint64_t seed, int verifier_index = 1, ClientId client_id = {});

/// v = W z0 + sum_i y_i + fresh N(0, sigma_v^2 I_k); accept iff ||v|| < tau.
/// Requires exactly one reply from each verifier 1..S-1.
VerificationOutcome verifier0_decide(const RealVector& z0, std::span<const ProjectionReply> replies,
                                     const ProjectionMatrix& W, double sigma_v, double tau, int S,
                                     std::uint64_t seed, ClientId client_id = {});

struct NormVerificationRun {
  VerificationOutcome outcome;
  Transcript transcript;
};

/// Runs the whole S-verifier protocol for one share bundle over the message
/// bus: shares (round 0), matrix broadcast (1), replies (2), accept bits (3).
NormVerificationRun run_norm_verification(const ShareBundle& bundle, const ProtocolParams& params,
                                          std::uint64_t session_seed, WMode w_mode = WMode::shared);

/// Replies produced by (possibly dishonest) verifiers in a coalition, given
/// their share and the broadcast matrix.
using ReplyFunction =
    std::function<RealVector(int verifier, const RealVector& share, const ProjectionMatrix& W)>;

/// Honest behaviour: W z + N(0, sigma_v^2 I_k) from a per-verifier stream.
ReplyFunction honest_reply_function(double sigma_v, std::uint64_t seed);

struct SimulatedNormVerification {
  Transcript transcript;
  ProjectionMatrix W;
  std::map<int, RealVector> shares;
  std::map<int, RealVector> replies;
  RealVector v_sim;
  bool accept = false;
};

/// Simulator for the coalition T (0 not in T) that never sees the secret.
/// v_sim = sum_{i in T} (y_i - W g_i) + N(0, (S - |T|) sigma_v^2 I_k).
SimulatedNormVerification simulate_norm_verification(const VerifierSet& T,
                                                     const ProtocolParams& params,
                                                     const ReplyFunction& replies_from_T,
                                                     std::uint64_t seed,
                                                     ClientId client_id = "simulated");

}  // namespace secagg

namespace secagg {

/// Wire form of a prover's share: raw f64 coordinates, or clamped and
/// quantized integer levels when params.trunc_B is set.
wire::Bytes encode_client_share(const ProtocolParams& params, std::string_view client_id,
                                const RealVector& share);

}  // namespace secagg
