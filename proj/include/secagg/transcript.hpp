#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <nlohmann/json_fwd.hpp>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "secagg/core_math.hpp"
#include "secagg/wire.hpp"

namespace secagg {

enum class MessageKind : std::uint8_t { share, matrix, reply, accept_bit, accepted_set, partial_sum };

std::string_view to_string(MessageKind kind) noexcept;

using PartyId = std::string;

PartyId verifier_party(int index);
PartyId client_party(std::string_view client_id);
bool is_verifier(std::string_view party) noexcept;

struct Message {
  PartyId sender;
  PartyId receiver;
  int round = 0;
  std::uint64_t sequence = 0;
  MessageKind kind = MessageKind::share;
  wire::Bytes payload;

  std::size_t byte_size() const noexcept { return payload.size(); }
};

/// Ordered record of every inter-party message in one protocol run.
struct Transcript {
  std::vector<Message> messages;
  std::uint64_t master_seed = 0;
  ProtocolParams params;
  std::vector<PartyId> parties;

  // SHA-256 (hex) over a canonical encoding of seed and messages.
  std::string digest() const;
  std::size_t total_bytes() const noexcept;
};

struct TrafficSummary {
  std::size_t client_to_server_bytes = 0;
  std::size_t inter_server_bytes = 0;
  std::size_t client_to_server_messages = 0;
  std::size_t inter_server_messages = 0;
};

TrafficSummary traffic(const Transcript& t);

/// Messages received by any party in T, in transcript order. Throws
/// unknown-party for a party that does not take part in the transcript.
std::vector<Message> view_of(const Transcript& t, const std::set<PartyId>& T);

/// Synchronous round-based delivery. Messages sent during a round are
/// appended to the transcript in send order when deliver() closes the round,
/// and only then become visible in the receivers' inboxes.
class MessageBus {
 public:
  explicit MessageBus(Transcript& transcript) : transcript_(transcript) {}

  void send(PartyId from, PartyId to, MessageKind kind, wire::Bytes payload);
  void deliver();

  int round() const noexcept { return round_; }

  // Messages delivered to `party` in the last closed round. References stay
  // valid until the next deliver().
  std::vector<std::reference_wrapper<const Message>> inbox(std::string_view party) const;

 private:
  Transcript& transcript_;
  std::vector<Message> pending_;
  std::size_t last_round_begin_ = 0;
  int round_ = 0;
};

void to_json(nlohmann::json& j, const ProtocolParams& p);
void from_json(const nlohmann::json& j, ProtocolParams& p);

/// Newline-delimited JSON: one header record, then one record per message
/// (seq, round, sender, receiver, kind, byte_size, payload_sha256 and,
/// optionally, payload_hex).
void write_transcript(std::ostream& out, const Transcript& t, bool include_payload);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace secagg
