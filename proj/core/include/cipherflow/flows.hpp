#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cipherflow/agents.hpp"
#include "cipherflow/backend.hpp"
#include "cipherflow/message.hpp"
#include "cipherflow/rng.hpp"
#include "cipherflow/rules.hpp"

namespace cipherflow::flows {

enum class ChannelKind { AgentFlow, EncryptedFlow };
std::string_view to_string(ChannelKind kind);

class LeakageViolation : public Error {
 public:
  LeakageViolation(const std::string& what, std::uint64_t round_id, Role origin)
      : Error(what), round_id_(round_id), origin_(origin) {}
  std::uint64_t round_id() const { return round_id_; }
  Role origin() const { return origin_; }

 private:
  std::uint64_t round_id_;
  Role origin_;
};

// Append-only message log with a tag admission rule: the agent flow takes
// only ciphertext, the encrypted flow only rules. A refused message is not
// logged.
class Channel {
 public:
  explicit Channel(ChannelKind kind) : kind_(kind) {}

  ChannelKind kind() const { return kind_; }
  bool admits(MessageTag tag) const;
  void publish(Message message);

  const std::vector<Message>& log() const { return log_; }
  // One JSON object per line.
  std::string to_jsonl() const;

 private:
  ChannelKind kind_;
  std::vector<Message> log_;
};

// Uppercase, whitespace runs collapsed to one space, trimmed. Non-ASCII bytes
// are kept.
std::string comparable(std::string_view text);

// True when `payload` equals or contains any non-empty known plaintext after
// comparable() on both sides.
bool contains_plaintext(std::string_view payload, std::span<const std::string> known_plaintexts);

struct LeakageFinding {
  std::uint64_t round_id;
  Role origin;
  std::string payload;
  std::string matched;
};

std::vector<LeakageFinding> leakage_audit(std::span<const Message> agent_flow_log,
                                          std::span<const std::string> known_plaintexts);

enum class Mode { ED, ERD };
std::string_view to_string(Mode mode);

// Seconds, microsecond resolution.
struct StageDurations {
  double rule_gen = 0;
  double enc = 0;
  double recipient = 0;
  double dec = 0;
  double total = 0;
};

struct RoundStatus {
  // Only the flag of the round's own mode is set.
  std::optional<bool> ed_success;
  std::optional<bool> erd_success;
  std::string failure_reason;
};

struct RoundRecord {
  std::uint64_t round_id = 0;
  Mode mode = Mode::ED;
  std::optional<rules::CipherRule> rule;
  std::string user_input;
  // What a correct pipeline delivers at the user boundary for this input.
  std::string expected_output;
  std::string ciphertext_in;
  std::string recipient_output;
  std::string final_output;
  StageDurations durations;
  RoundStatus status;
  // Method named by a failed rule generation, when recognisable.
  std::optional<cipher::CipherMethod> failed_method;
  std::string failed_method_text;
  std::vector<std::pair<Role, DialogueTurn>> transcript;
};

nlohmann::ordered_json to_json(const RoundRecord& record, bool with_transcript = false);

// Monotonic time source. Sessions read it at each stage boundary.
using ClockSource = std::function<std::chrono::nanoseconds()>;
ClockSource steady_clock_source();
// Advances by `step` on every reading; makes durations reproducible.
ClockSource tick_clock_source(std::chrono::nanoseconds step);

// Expected user-boundary output of a perfect round.
std::string expected_output(cipher::CipherMethod method, std::string_view user_input, Mode mode,
                            const TaskSpec& task);

struct SessionOptions {
  std::uint64_t seed = 0;
  MethodSelector selector = MethodSelector::uniform();
  TaskSpec task = TaskSpec::letter_frequency();
  ClockSource clock;  // steady clock when empty
};

// One conversation: a backend, its agents and the two channels. Rounds run
// strictly in sequence.
class Session {
 public:
  Session(Backend& backend, SessionOptions options);

  RoundRecord run_round(std::string_view user_input, Mode mode);

  const Channel& agent_flow() const { return agent_flow_; }
  const Channel& encrypted_flow() const { return encrypted_flow_; }
  const RuleAgent& rule_agent() const { return rule_agent_; }
  const EncryptionAgent& encryption_agent() const { return encryption_agent_; }
  const RecipientAgent& recipient_agent() const { return recipient_agent_; }
  const DecryptionAgent& decryption_agent() const { return decryption_agent_; }
  std::size_t leakage_violations() const { return leakage_violations_; }
  std::uint64_t rounds_run() const { return next_round_ - 1; }

 private:
  void publish_ciphertext(const Message& message, std::span<const std::string> known);
  void clear_histories();

  Backend& backend_;
  SessionOptions options_;
  Rng rng_;
  RuleAgent rule_agent_;
  EncryptionAgent encryption_agent_;
  RecipientAgent recipient_agent_;
  DecryptionAgent decryption_agent_;
  Channel agent_flow_{ChannelKind::AgentFlow};
  Channel encrypted_flow_{ChannelKind::EncryptedFlow};
  std::size_t leakage_violations_ = 0;
  std::uint64_t next_round_ = 1;
};

}  // namespace cipherflow::flows
