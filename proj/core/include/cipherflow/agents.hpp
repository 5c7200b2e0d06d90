#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cipherflow/backend.hpp"
#include "cipherflow/message.hpp"
#include "cipherflow/rng.hpp"
#include "cipherflow/rules.hpp"

namespace cipherflow {

// Distribution the rule agent draws a method hint from.
class MethodSelector {
 public:
  static MethodSelector uniform();
  // Weights indexed like cipher::kAllMethods; at least one must be positive.
  static MethodSelector weighted(const std::array<double, 5>& weights);
  static MethodSelector only(cipher::CipherMethod method);

  cipher::CipherMethod draw(Rng& rng) const;
  const std::array<double, 5>& weights() const { return weights_; }

 private:
  explicit MethodSelector(const std::array<double, 5>& weights) : weights_(weights) {}
  std::array<double, 5> weights_;
};

class PhaseParseFailure : public Error {
 public:
  PhaseParseFailure(int phase, std::string detail)
      : Error("PhaseParseFailure(phase " + std::to_string(phase) + ": " + detail + ")"),
        phase_(phase),
        detail_(std::move(detail)) {}
  int phase() const { return phase_; }
  const std::string& detail() const { return detail_; }

 private:
  int phase_;
  std::string detail_;
};

// Raised after a phase exhausts its retries.
class RuleGenerationFailed : public Error {
 public:
  RuleGenerationFailed(const PhaseParseFailure& last, std::optional<cipher::CipherMethod> method,
                       std::string method_text)
      : Error("RuleGenerationFailed: " + std::string(last.what())),
        last_(last),
        method_(method),
        method_text_(std::move(method_text)) {}
  const PhaseParseFailure& last_failure() const { return last_; }
  // Method named in the phase-one reply, when it was recognised.
  std::optional<cipher::CipherMethod> method() const { return method_; }
  // Raw "Encryption Method Chosen" content, when the section was present.
  const std::string& method_text() const { return method_text_; }

 private:
  PhaseParseFailure last_;
  std::optional<cipher::CipherMethod> method_;
  std::string method_text_;
};

struct MemoryEntry {
  std::uint64_t round_id;
  rules::CipherRule rule;
};

// Rules recorded across rounds. Append-only.
class RuleAgentMemory {
 public:
  void record(std::uint64_t round_id, rules::CipherRule rule);
  const std::vector<MemoryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const MemoryEntry* latest() const { return entries_.empty() ? nullptr : &entries_.back(); }

 private:
  std::vector<MemoryEntry> entries_;
};

// One exchange in an agent's working context for the current round.
struct DialogueTurn {
  std::string request;
  std::string reply;
};

class RuleAgent {
 public:
  static constexpr int kMaxRetriesPerPhase = 2;

  // Three-phase generation: masked template, slot ranges, fill. Values are
  // always drawn from `rng`. Throws RuleGenerationFailed.
  rules::CipherRule generate(Backend& backend, Rng& rng, const MethodSelector& selector,
                             std::uint64_t round_id);

  const RuleAgentMemory& memory() const { return memory_; }
  // Working context of the generation in progress; empty between rounds.
  const std::vector<DialogueTurn>& dialogue() const { return dialogue_; }
  // Exchanges of the last generate() call, handed over once for the round log.
  std::vector<DialogueTurn> take_transcript() { return std::exchange(transcript_, {}); }

 private:
  RuleAgentMemory memory_;
  std::vector<DialogueTurn> dialogue_;
  std::vector<DialogueTurn> transcript_;
};

// Seed-only convenience: fresh agent state, fresh Rng.
rules::CipherRule rule_agent_generate(Backend& backend, std::uint64_t seed,
                                      const MethodSelector& selector);

// Base for the three single-shot agents: keeps the round's exchanges until
// cleared.
class WorkerAgent {
 public:
  const std::vector<DialogueTurn>& dialogue() const { return dialogue_; }
  void clear_dialogue() { dialogue_.clear(); }

 protected:
  void remember(std::string request, const BackendReply& reply);

 private:
  std::vector<DialogueTurn> dialogue_;
};

class EncryptionAgent : public WorkerAgent {
 public:
  // Refuses input not tagged plaintext (std::invalid_argument).
  Message encrypt(Backend& backend, const rules::CipherRule& rule, const Message& plaintext);
};

class DecryptionAgent : public WorkerAgent {
 public:
  Message decrypt(Backend& backend, const rules::CipherRule& rule, const Message& ciphertext);
};

class RecipientAgent : public WorkerAgent {
 public:
  Message process(Backend& backend, const rules::CipherRule& rule, const Message& ciphertext,
                  const TaskSpec& task);
};

// Free-function forms for single calls outside a session.
Message encryption_agent_encrypt(Backend& backend, const rules::CipherRule& rule,
                                 std::string_view plaintext);
Message decryption_agent_decrypt(Backend& backend, const rules::CipherRule& rule,
                                 std::string_view ciphertext);
Message recipient_agent_process(Backend& backend, const rules::CipherRule& rule,
                                std::string_view ciphertext, const TaskSpec& task);

}  // namespace cipherflow
