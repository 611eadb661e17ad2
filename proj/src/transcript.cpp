#include "secagg/transcript.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <memory>
#include <nlohmann/json.hpp>
#include <ostream>

#include "secagg/error.hpp"

namespace secagg {

std::string_view to_string(MessageKind kind) noexcept {
  switch (kind) {
    case MessageKind::share: return "share";
    case MessageKind::matrix: return "matrix";
    case MessageKind::reply: return "reply";
    case MessageKind::accept_bit: return "accept-bit";
    case MessageKind::accepted_set: return "accepted-set";
    case MessageKind::partial_sum: return "partial-sum";
  }
  return "unknown";
}

PartyId verifier_party(int index) { return "V" + std::to_string(index); }

PartyId client_party(std::string_view client_id) { return "C:" + std::string(client_id); }

bool is_verifier(std::string_view party) noexcept {
  return party.size() >= 2 && party[0] == 'V';
}

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("SHA-256 initialisation failed");
  }
  void update(const void* data, std::size_t len) { EVP_DigestUpdate(ctx_.get(), data, len); }
  void update_u64(std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    update(b, 8);
  }
  void update_str(std::string_view s) {
    update_u64(s.size());
    update(s.data(), s.size());
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), md, &len);
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(digits[md[i] >> 4]);
      out.push_back(digits[md[i] & 0xf]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string Transcript::digest() const {
  Sha256 h;
  h.update_u64(master_seed);
  for (const Message& m : messages) {
    h.update_str(m.sender);
    h.update_str(m.receiver);
    h.update_u64(static_cast<std::uint64_t>(m.round));
    h.update_u64(m.sequence);
    h.update_u64(static_cast<std::uint64_t>(m.kind));
    h.update_u64(m.payload.size());
    h.update(m.payload.data(), m.payload.size());
  }
  return h.hex();
}

std::size_t Transcript::total_bytes() const noexcept {
  std::size_t total = 0;
  for (const Message& m : messages) total += m.byte_size();
  return total;
}

TrafficSummary traffic(const Transcript& t) {
  TrafficSummary s;
  for (const Message& m : t.messages) {
    if (is_verifier(m.sender) && is_verifier(m.receiver)) {
      s.inter_server_bytes += m.byte_size();
      ++s.inter_server_messages;
    } else {
      s.client_to_server_bytes += m.byte_size();
      ++s.client_to_server_messages;
    }
  }
  return s;
}

std::vector<Message> view_of(const Transcript& t, const std::set<PartyId>& T) {
  for (const PartyId& p : T) {
    require(std::find(t.parties.begin(), t.parties.end(), p) != t.parties.end(),
            ErrorCode::unknown_party, "party '" + p + "' is not part of the transcript");
  }
  std::vector<Message> view;
  for (const Message& m : t.messages) {
    if (T.contains(m.receiver)) view.push_back(m);
  }
  return view;
}

void MessageBus::send(PartyId from, PartyId to, MessageKind kind, wire::Bytes payload) {
  Message m;
  m.sender = std::move(from);
  m.receiver = std::move(to);
  m.round = round_;
  m.kind = kind;
  m.payload = std::move(payload);
  pending_.push_back(std::move(m));
}

void MessageBus::deliver() {
  last_round_begin_ = transcript_.messages.size();
  for (Message& m : pending_) {
    m.sequence = transcript_.messages.size();
    transcript_.messages.push_back(std::move(m));
  }
  pending_.clear();
  ++round_;
}

std::vector<std::reference_wrapper<const Message>> MessageBus::inbox(std::string_view party) const {
  std::vector<std::reference_wrapper<const Message>> out;
  for (std::size_t i = last_round_begin_; i < transcript_.messages.size(); ++i) {
    if (transcript_.messages[i].receiver == party) out.emplace_back(transcript_.messages[i]);
  }
  return out;
}

void to_json(nlohmann::json& j, const ProtocolParams& p) {
  j = nlohmann::json{{"S", p.S},           {"n", p.n},
                     {"d", p.d},           {"k", p.k},
                     {"eps", p.eps},       {"delta", p.delta},
                     {"eps_ss", p.eps_ss}, {"delta_ss", p.delta_ss},
                     {"beta", p.beta},     {"sigma_ss", p.sigma_ss},
                     {"sigma_v", p.sigma_v}, {"tau", p.tau},
                     {"rho", p.rho},       {"quant_step", p.quant_step}};
  j["trunc_B"] = p.trunc_B ? nlohmann::json(*p.trunc_B) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ProtocolParams& p) {
  j.at("S").get_to(p.S);
  j.at("n").get_to(p.n);
  j.at("d").get_to(p.d);
  j.at("k").get_to(p.k);
  j.at("eps").get_to(p.eps);
  j.at("delta").get_to(p.delta);
  j.at("eps_ss").get_to(p.eps_ss);
  j.at("delta_ss").get_to(p.delta_ss);
  j.at("beta").get_to(p.beta);
  j.at("sigma_ss").get_to(p.sigma_ss);
  j.at("sigma_v").get_to(p.sigma_v);
  j.at("tau").get_to(p.tau);
  j.at("rho").get_to(p.rho);
  j.at("quant_step").get_to(p.quant_step);
  if (j.contains("trunc_B") && !j.at("trunc_B").is_null()) {
    p.trunc_B = j.at("trunc_B").get<double>();
  } else {
    p.trunc_B.reset();
  }
}

void write_transcript(std::ostream& out, const Transcript& t, bool include_payload) {
  nlohmann::json header{{"record", "header"},
                        {"schema", "secagg-transcript/1"},
                        {"master_seed", t.master_seed},
                        {"parties", t.parties},
                        {"params", t.params},
                        {"messages", t.messages.size()},
                        {"sha256", t.digest()}};
  out << header.dump() << '\n';
  for (const Message& m : t.messages) {
    nlohmann::json rec{{"record", "message"},
                       {"seq", m.sequence},
                       {"round", m.round},
                       {"sender", m.sender},
                       {"receiver", m.receiver},
                       {"kind", std::string(to_string(m.kind))},
                       {"byte_size", m.byte_size()},
                       {"payload_sha256", sha256_hex(m.payload)}};
    if (include_payload) rec["payload_hex"] = to_hex(m.payload);
    out << rec.dump() << '\n';
  }
}

}  // namespace secagg
