#include "secagg/norm_verification.hpp"

#include <cmath>

#include "secagg/error.hpp"
#include "secagg/rng.hpp"

namespace secagg {

std::string to_string(WMode mode) { return mode == WMode::shared ? "shared" : "verifier0"; }

WMode parse_w_mode(std::string_view text) {
  if (text == "shared") return WMode::shared;
  if (text == "verifier0") return WMode::verifier0;
  throw Error(ErrorCode::invalid_parameter, "unknown w_mode '" + std::string(text) + "'");
}

std::uint64_t projection_seed(std::uint64_t session_seed, WMode mode) {
  return mode == WMode::shared ? derive_seed(session_seed, StreamTag::shared_projection)
                               : derive_seed(session_seed, StreamTag::verifier_private, {0});
}

std::uint64_t verifier_noise_seed(std::uint64_t session_seed, int verifier,
                                  std::string_view client_id) {
  return derive_seed(session_seed, StreamTag::verifier_noise,
                     {static_cast<std::uint64_t>(verifier), hash_label(client_id)});
}

ProjectionMatrix session_projection(std::uint64_t session_seed, int k, int d, WMode mode) {
  return sample_projection(k, d, projection_seed(session_seed, mode),
                           mode == WMode::shared ? ProjectionProvenance::shared_randomness
                                                 : ProjectionProvenance::verifier0_private);
}

wire::Bytes encode_client_share(const ProtocolParams& params, std::string_view client_id,
                                const RealVector& share) {
  if (!params.trunc_B) return wire::encode_share(client_id, share);
  wire::QuantizedShare q;
  q.levels = quantize_share(share, *params.trunc_B, params.quant_step);
  q.step = params.quant_step;
  q.width = wire::level_width(static_cast<std::int64_t>(std::floor(*params.trunc_B / params.quant_step)));
  return wire::encode_quantized_share(client_id, q);
}

ProjectionReply project_reply(const RealVector& z, const ProjectionMatrix& W, double sigma_v,
                              std::uint64_t seed, int verifier_index, ClientId client_id) {
  require(sigma_v > 0, ErrorCode::invalid_parameter, "sigma_v must be > 0");
  ProjectionReply reply;
  reply.client_id = std::move(client_id);
  reply.verifier_index = verifier_index;
  reply.y = W.apply(z);
  RealVector noise(W.rows());
  Rng(seed).fill_gaussian(noise.values(), sigma_v);
  reply.y += noise;
  return reply;
}

VerificationOutcome verifier0_decide(const RealVector& z0, std::span<const ProjectionReply> replies,
                                     const ProjectionMatrix& W, double sigma_v, double tau, int S,
                                     std::uint64_t seed, ClientId client_id) {
  require(S >= 2, ErrorCode::invalid_parameter, "S must be >= 2");
  require(sigma_v > 0 && tau > 0, ErrorCode::invalid_parameter, "sigma_v and tau must be > 0");
  std::vector<const ProjectionReply*> by_index(S, nullptr);
  for (const ProjectionReply& r : replies) {
    require(r.verifier_index >= 1 && r.verifier_index < S, ErrorCode::invalid_parameter,
            "reply from out-of-range verifier " + std::to_string(r.verifier_index));
    require(by_index[r.verifier_index] == nullptr, ErrorCode::invalid_parameter,
            "two replies from verifier " + std::to_string(r.verifier_index));
    require(r.y.dim() == W.rows(), ErrorCode::dimension_mismatch,
            "reply dimension " + std::to_string(r.y.dim()) + " != k = " + std::to_string(W.rows()));
    by_index[r.verifier_index] = &r;
  }
  for (int i = 1; i < S; ++i) {
    require(by_index[i] != nullptr, ErrorCode::missing_reply,
            "no reply from verifier " + std::to_string(i));
  }

  RealVector v = W.apply(z0);
  for (int i = 1; i < S; ++i) v += by_index[i]->y;
  RealVector noise(W.rows());
  Rng(seed).fill_gaussian(noise.values(), sigma_v);
  v += noise;

  VerificationOutcome out;
  out.client_id = std::move(client_id);
  out.v_norm = v.norm();
  out.tau = tau;
  out.accept = out.v_norm < tau;
  return out;
}

NormVerificationRun run_norm_verification(const ShareBundle& bundle, const ProtocolParams& params,
                                          std::uint64_t session_seed, WMode w_mode) {
  params.validate();
  const int S = params.S;
  require(static_cast<int>(bundle.num_verifiers()) == S, ErrorCode::invalid_parameter,
          "bundle has " + std::to_string(bundle.num_verifiers()) + " shares, expected S = " +
              std::to_string(S));
  require(bundle.dim() == static_cast<std::size_t>(params.d), ErrorCode::dimension_mismatch,
          "bundle dimension differs from params.d");

  NormVerificationRun run;
  Transcript& t = run.transcript;
  t.master_seed = session_seed;
  t.params = params;
  const std::string id = bundle.client_id.empty() ? "prover" : bundle.client_id;
  const PartyId prover = client_party(id);
  t.parties.push_back(prover);
  for (int i = 0; i < S; ++i) t.parties.push_back(verifier_party(i));

  MessageBus bus(t);

  // Round 0: prover -> every verifier.
  for (int i = 0; i < S; ++i) {
    bus.send(prover, verifier_party(i), MessageKind::share,
             encode_client_share(params, id, bundle.shares[i]));
  }
  bus.deliver();

  std::vector<RealVector> received(S);
  for (int i = 0; i < S; ++i) {
    auto inbox = bus.inbox(verifier_party(i));
    require(inbox.size() == 1, ErrorCode::protocol_abort,
            "verifier " + std::to_string(i) + " did not receive exactly one share");
    received[i] = wire::decode_share(inbox.front().get().payload).share;
    require(received[i].dim() == static_cast<std::size_t>(params.d), ErrorCode::protocol_abort,
            "share has wrong dimension");
  }

  // Round 1: verifier 0 broadcasts W.
  const ProjectionMatrix W = session_projection(session_seed, params.k, params.d, w_mode);
  const wire::Bytes w_bytes = wire::encode_matrix(W);
  for (int i = 1; i < S; ++i) bus.send(verifier_party(0), verifier_party(i), MessageKind::matrix, w_bytes);
  bus.deliver();

  // Round 2: verifiers i >= 1 reply with noisy projections.
  std::vector<ProjectionMatrix> local_w(S);
  for (int i = 1; i < S; ++i) {
    auto inbox = bus.inbox(verifier_party(i));
    require(inbox.size() == 1 && inbox.front().get().kind == MessageKind::matrix,
            ErrorCode::protocol_abort, "verifier " + std::to_string(i) + " expected the matrix");
    local_w[i] = wire::decode_matrix(inbox.front().get().payload, W.provenance());
    if (w_mode == WMode::shared) {
      require(local_w[i] == session_projection(session_seed, params.k, params.d, w_mode),
              ErrorCode::protocol_abort, "broadcast W differs from the shared-randomness W");
    }
  }
  for (int i = 1; i < S; ++i) {
    ProjectionReply r = project_reply(received[i], local_w[i], params.sigma_v,
                                      verifier_noise_seed(session_seed, i, id), i, id);
    const wire::IdVector entry{id, std::move(r.y)};
    bus.send(verifier_party(i), verifier_party(0), MessageKind::reply,
             wire::encode_replies(std::span(&entry, 1)));
  }
  bus.deliver();

  // Round 3: verifier 0 decides and broadcasts the bit.
  std::vector<ProjectionReply> replies;
  for (const Message& m : bus.inbox(verifier_party(0))) {
    auto decoded = wire::decode_replies(m.payload);
    require(decoded.size() == 1 && decoded.front().first == id, ErrorCode::protocol_abort,
            "unexpected reply payload from " + m.sender);
    replies.push_back({id, std::stoi(m.sender.substr(1)), std::move(decoded.front().second)});
  }
  run.outcome = verifier0_decide(received[0], replies, W, params.sigma_v, params.tau, S,
                                 verifier_noise_seed(session_seed, 0, id), id);
  for (int i = 1; i < S; ++i) {
    bus.send(verifier_party(0), verifier_party(i), MessageKind::accept_bit,
             wire::encode_accept(id, run.outcome.accept));
  }
  bus.deliver();
  return run;
}

ReplyFunction honest_reply_function(double sigma_v, std::uint64_t seed) {
  return [sigma_v, seed](int verifier, const RealVector& share, const ProjectionMatrix& W) {
    return project_reply(share, W, sigma_v, derive_seed(seed, {static_cast<std::uint64_t>(verifier)}),
                         verifier)
        .y;
  };
}

SimulatedNormVerification simulate_norm_verification(const VerifierSet& T,
                                                     const ProtocolParams& params,
                                                     const ReplyFunction& replies_from_T,
                                                     std::uint64_t seed, ClientId client_id) {
  params.validate();
  check_coalition(T, params.S, true);
  require(!T.contains(0), ErrorCode::invalid_subset,
          "this simulator covers coalitions without verifier 0");

  SimulatedNormVerification sim;
  Transcript& t = sim.transcript;
  t.master_seed = seed;
  t.params = params;
  const PartyId prover = client_party(client_id);
  t.parties.push_back(prover);
  for (int i = 0; i < params.S; ++i) t.parties.push_back(verifier_party(i));
  MessageBus bus(t);

  Rng share_rng(derive_seed(seed, StreamTag::simulator, {1}));
  for (int i : T) {
    RealVector g(params.d);
    share_rng.fill_gaussian(g.values(), params.sigma_ss);
    bus.send(prover, verifier_party(i), MessageKind::share, encode_client_share(params, client_id, g));
    sim.shares.emplace(i, std::move(g));
  }
  bus.deliver();

  sim.W = sample_projection(params.k, params.d, derive_seed(seed, StreamTag::simulator, {2}));
  const wire::Bytes w_bytes = wire::encode_matrix(sim.W);
  for (int i : T) bus.send(verifier_party(0), verifier_party(i), MessageKind::matrix, w_bytes);
  bus.deliver();

  sim.v_sim = RealVector(params.k);
  for (int i : T) {
    RealVector y = replies_from_T(i, sim.shares.at(i), sim.W);
    require(y.dim() == static_cast<std::size_t>(params.k), ErrorCode::dimension_mismatch,
            "injected reply has wrong dimension");
    const wire::IdVector entry{client_id, y};
    bus.send(verifier_party(i), verifier_party(0), MessageKind::reply,
             wire::encode_replies(std::span(&entry, 1)));
    sim.v_sim += y - sim.W.apply(sim.shares.at(i));
    sim.replies.emplace(i, std::move(y));
  }
  bus.deliver();

  const double honest = static_cast<double>(params.S - static_cast<int>(T.size()));
  RealVector noise(params.k);
  Rng(derive_seed(seed, StreamTag::simulator, {3})).fill_gaussian(noise.values(),
                                                                  std::sqrt(honest) * params.sigma_v);
  sim.v_sim += noise;
  sim.accept = sim.v_sim.norm() < params.tau;
  for (int i : T) {
    bus.send(verifier_party(0), verifier_party(i), MessageKind::accept_bit,
             wire::encode_accept(client_id, sim.accept));
  }
  bus.deliver();
  return sim;
}

}  // namespace secagg
