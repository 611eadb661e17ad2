#include "secagg/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "secagg/error.hpp"
#include "secagg/kernels.hpp"
#include "secagg/rng.hpp"

namespace secagg {

std::string to_string(ClientBehavior behavior) {
  switch (behavior) {
    case ClientBehavior::honest: return "honest";
    case ClientBehavior::norm_inflating: return "norm-inflating";
    case ClientBehavior::inconsistent_shares: return "inconsistent-shares";
    case ClientBehavior::partial_send: return "partial-send";
  }
  return "unknown";
}

ClientBehavior parse_client_behavior(std::string_view text) {
  for (auto b : {ClientBehavior::honest, ClientBehavior::norm_inflating,
                 ClientBehavior::inconsistent_shares, ClientBehavior::partial_send}) {
    if (text == to_string(b)) return b;
  }
  throw Error(ErrorCode::invalid_parameter, "unknown client behavior '" + std::string(text) + "'");
}

ClientSubmission submission_from_bundle(const ShareBundle& bundle, ClientBehavior behavior) {
  ClientSubmission s;
  s.client_id = bundle.client_id;
  s.behavior = behavior;
  for (const RealVector& share : bundle.shares) s.payloads.emplace_back(share);
  return s;
}

bool AggregateResult::accepted_contains(std::string_view id) const {
  return std::find(accepted.begin(), accepted.end(), id) != accepted.end();
}

bool validity_check(std::size_t accepted_count, int n, double threshold_fraction) {
  return static_cast<double>(accepted_count) >= threshold_fraction * n;
}

ValidityPredicate size_threshold(double threshold_fraction) {
  require(threshold_fraction > 0 && threshold_fraction <= 1, ErrorCode::invalid_parameter,
          "validity threshold must be in (0, 1]");
  return [threshold_fraction](std::span<const ClientId> accepted, int n) {
    return validity_check(accepted.size(), n, threshold_fraction);
  };
}

namespace {

// What one verifier holds after the share round.
struct VerifierState {
  std::vector<ClientId> order;  // J_i in arrival order
  std::unordered_map<ClientId, RealVector> shares;
};

VerifierState ingest_shares(const MessageBus& bus, int verifier, std::size_t d) {
  VerifierState st;
  for (const Message& m : bus.inbox(verifier_party(verifier))) {
    if (m.kind != MessageKind::share) continue;
    try {
      wire::SharePayload p = wire::decode_share(m.payload);
      // A payload that does not parse or has the wrong shape is treated as
      // not received: the client simply drops out of J_i.
      if (p.share.dim() != d || m.sender != client_party(p.client_id)) continue;
      if (st.shares.contains(p.client_id)) continue;
      st.order.push_back(p.client_id);
      st.shares.emplace(p.client_id, std::move(p.share));
    } catch (const Error&) {
    }
  }
  return st;
}

RealVector partial_sum(const VerifierState& st, std::span<const ClientId> accepted, std::size_t d) {
  RealVector s(d);
  for (const ClientId& j : accepted) s += st.shares.at(j);
  return s;
}

}  // namespace

AggregationRun run_aggregation(std::span<const ClientSubmission> submissions,
                               const ProtocolParams& params, std::uint64_t seed,
                               const AggregationOptions& options) {
  params.validate();
  const int S = params.S;
  const auto d = static_cast<std::size_t>(params.d);

  std::set<ClientId> seen;
  for (const ClientSubmission& s : submissions) {
    require(seen.insert(s.client_id).second, ErrorCode::duplicate_client_id,
            "client id '" + s.client_id + "' submitted twice");
  }

  AggregationRun run;
  Transcript& t = run.transcript;
  AggregateResult& result = run.result;
  t.master_seed = seed;
  t.params = params;
  for (const ClientSubmission& s : submissions) t.parties.push_back(client_party(s.client_id));
  for (int i = 0; i < S; ++i) t.parties.push_back(verifier_party(i));
  MessageBus bus(t);

  // Round 0: shares.
  for (const ClientSubmission& s : submissions) {
    const std::size_t slots = std::min<std::size_t>(s.payloads.size(), S);
    for (std::size_t i = 0; i < slots; ++i) {
      if (!s.payloads[i]) continue;
      bus.send(client_party(s.client_id), verifier_party(static_cast<int>(i)), MessageKind::share,
               encode_client_share(params, s.client_id, *s.payloads[i]));
    }
  }
  bus.deliver();
  std::vector<VerifierState> state(S);
  for (int i = 0; i < S; ++i) state[i] = ingest_shares(bus, i, d);

  // Round 1: one projection matrix for the whole session.
  const ProjectionMatrix W = session_projection(seed, params.k, params.d, options.w_mode);
  {
    const wire::Bytes w_bytes = wire::encode_matrix(W);
    for (int i = 1; i < S; ++i) bus.send(verifier_party(0), verifier_party(i), MessageKind::matrix, w_bytes);
  }
  bus.deliver();

  // Round 2: batched replies.
  std::vector<wire::Bytes> reply_payloads(S);
  for (int i = 1; i < S; ++i) {
    auto inbox = bus.inbox(verifier_party(i));
    require(inbox.size() == 1 && inbox.front().get().kind == MessageKind::matrix,
            ErrorCode::protocol_abort, "verifier " + std::to_string(i) + " expected the matrix");
    const ProjectionMatrix local_w = wire::decode_matrix(inbox.front().get().payload, W.provenance());
    if (options.w_mode == WMode::shared) {
      require(local_w == session_projection(seed, params.k, params.d, options.w_mode),
              ErrorCode::protocol_abort, "broadcast W differs from the shared-randomness W");
    }
    const VerifierState& st = state[i];
    std::vector<wire::IdVector> replies(st.order.size());
    kernels::for_each_index(st.order.size(), [&](std::size_t j) {
      const ClientId& id = st.order[j];
      replies[j] = {id, project_reply(st.shares.at(id), local_w, params.sigma_v,
                                      verifier_noise_seed(seed, i, id), i, id)
                            .y};
    });
    reply_payloads[i] = wire::encode_replies(replies);
  }
  for (int i = 1; i < S; ++i) {
    bus.send(verifier_party(i), verifier_party(0), MessageKind::reply, std::move(reply_payloads[i]));
  }
  bus.deliver();

  // Round 3: verifier 0 decides for every j in J = intersection of the J_i.
  std::vector<std::unordered_map<ClientId, RealVector>> replies(S);
  for (const Message& m : bus.inbox(verifier_party(0))) {
    const int from = std::stoi(m.sender.substr(1));
    for (auto& [id, y] : wire::decode_replies(m.payload)) {
      if (y.dim() == static_cast<std::size_t>(params.k)) replies[from].emplace(id, std::move(y));
    }
  }
  for (const ClientId& id : state[0].order) {
    bool everywhere = true;
    for (int i = 1; i < S && everywhere; ++i) everywhere = replies[i].contains(id);
    if (everywhere) result.reached_all.push_back(id);
  }
  std::vector<VerificationOutcome> outcomes(result.reached_all.size());
  kernels::for_each_index(result.reached_all.size(), [&](std::size_t j) {
    const ClientId& id = result.reached_all[j];
    std::vector<ProjectionReply> rs;
    rs.reserve(S - 1);
    for (int i = 1; i < S; ++i) rs.push_back({id, i, replies[i].at(id)});
    outcomes[j] = verifier0_decide(state[0].shares.at(id), rs, W, params.sigma_v, params.tau, S,
                                   verifier_noise_seed(seed, 0, id), id);
  });
  for (VerificationOutcome& o : outcomes) {
    if (o.accept) result.accepted.push_back(o.client_id);
    result.per_client_outcomes.emplace(o.client_id, std::move(o));
  }
  {
    const wire::Bytes set_bytes = wire::encode_id_set(result.accepted);
    for (int i = 1; i < S; ++i)
      bus.send(verifier_party(0), verifier_party(i), MessageKind::accepted_set, set_bytes);
  }
  bus.deliver();

  const int n = static_cast<int>(submissions.size());
  if (options.validity && !(*options.validity)(result.accepted, n)) {
    result.aborted = true;
    return run;
  }

  // Round 4: partial sums over J*.
  for (int i = 1; i < S; ++i) {
    auto inbox = bus.inbox(verifier_party(i));
    require(inbox.size() == 1 && inbox.front().get().kind == MessageKind::accepted_set,
            ErrorCode::protocol_abort, "verifier " + std::to_string(i) + " expected J*");
    const std::vector<ClientId> j_star = wire::decode_id_set(inbox.front().get().payload);
    for (const ClientId& id : j_star) {
      require(state[i].shares.contains(id), ErrorCode::protocol_abort,
              "J* names a client verifier " + std::to_string(i) + " never heard from");
    }
    RealVector s = partial_sum(state[i], j_star, d);
    if (options.output_noise_sigma) {
      RealVector noise(d);
      Rng(derive_seed(seed, StreamTag::output_noise, {static_cast<std::uint64_t>(i)}))
          .fill_gaussian(noise.values(), *options.output_noise_sigma);
      s += noise;
    }
    bus.send(verifier_party(i), verifier_party(0), MessageKind::partial_sum, wire::encode_vector(s));
  }
  bus.deliver();

  RealVector sum = partial_sum(state[0], result.accepted, d);
  if (options.output_noise_sigma) {
    RealVector noise(d);
    Rng(derive_seed(seed, StreamTag::output_noise, {0})).fill_gaussian(noise.values(),
                                                                        *options.output_noise_sigma);
    sum += noise;
  }
  std::vector<RealVector> partials(S);
  for (const Message& m : bus.inbox(verifier_party(0))) {
    partials[std::stoi(m.sender.substr(1))] = wire::decode_vector(m.payload);
  }
  for (int i = 1; i < S; ++i) {
    require(partials[i].dim() == d, ErrorCode::protocol_abort,
            "missing partial sum from verifier " + std::to_string(i));
    sum += partials[i];
  }
  result.sum = std::move(sum);
  return run;
}

double robustness_delta(const AggregateResult& with, const AggregateResult& without) {
  require(!with.aborted && !without.aborted && with.sum && without.sum, ErrorCode::aborted_input,
          "robustness_delta needs two completed aggregations");
  require(with.sum->dim() == without.sum->dim(), ErrorCode::dimension_mismatch,
          "aggregate dimensions differ");
  return distance(*with.sum, *without.sum);
}

}  // namespace secagg
