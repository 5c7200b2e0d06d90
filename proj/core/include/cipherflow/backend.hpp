#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cipherflow/cipher.hpp"
#include "cipherflow/error.hpp"
#include "cipherflow/rules.hpp"

namespace cipherflow {

enum class TaskKind { LetterFrequency, Echo };

// What the recipient agent is asked to do with the hidden plaintext. The
// three phrase fields fill the braces of the recipient prompt.
struct TaskSpec {
  std::string description;
  TaskKind kind = TaskKind::LetterFrequency;
  std::string role_phrase;
  std::string task_phrase;
  std::string task_name;

  static TaskSpec letter_frequency();
  static TaskSpec echo();
};

// Throws std::invalid_argument when the description is empty.
void validate_task(const TaskSpec& task);

// Everything a backend sees when asked for one phase of rule generation.
// `prior_replies` holds the replies to the earlier phases of the same
// conversation and nothing from earlier rounds.
struct RulePhaseContext {
  int phase = 1;
  std::vector<std::string> prior_replies;
  // Set by the rule agent from its method selector. Model backends ignore it
  // so the model's own preference is what gets measured.
  std::optional<cipher::CipherMethod> method_hint;
  // Phase 3 only: the template and the engine-drawn values for its slots.
  std::optional<rules::MaskedRuleTemplate> masked;
  std::vector<rules::SlotValue> values;
};

// Answer text plus the unprocessed reply it was extracted from.
struct BackendReply {
  std::string text;
  std::string raw;
};

enum class TransformRole { Encrypt, Decrypt };

class BackendFailure : public Error {
 public:
  using Error::Error;
};

// Capability interface behind every agent. Implementations must tolerate
// concurrent calls from different sessions.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string_view name() const = 0;

  // When true the rule is taken from the phase-3 reply; otherwise the engine
  // fills the template with its own drawn values.
  virtual bool fills_numbers() const { return false; }

  virtual BackendReply generate_rule_phase(const RulePhaseContext& context) = 0;
  virtual BackendReply transform(TransformRole role, const rules::CipherRule& rule,
                                 std::string_view input) = 0;
  virtual BackendReply recipient_task(const rules::CipherRule& rule, std::string_view ciphertext,
                                      const TaskSpec& task) = 0;
};

// Line appended to the phase-3 request when the engine supplies the values,
// e.g. "Use exactly these values for the masks: <MASK_1> = 13." Empty when
// there is nothing to fill.
std::string engine_values_instruction(const RulePhaseContext& context);

// "A:3 B:1": uppercase letters in alphabetical order, space separated.
std::string render_frequency(const std::map<char, std::size_t>& counts);

}  // namespace cipherflow
