#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cipherflow/error.hpp"

namespace cipherflow::llm {

enum class TemplateId { RulePhase1, RulePhase2, RulePhase3, Encrypt, Decrypt, Recipient };

std::string_view to_string(TemplateId id);

// Prompt body with `{name}` placeholders for the filled-in parts.
std::string_view template_body(TemplateId id);

// Placeholder names in the body, in order of first appearance.
std::vector<std::string> template_slots(TemplateId id);

class MissingSlot : public Error {
 public:
  explicit MissingSlot(std::string name)
      : Error("MissingSlot(" + name + ")"), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// Single-pass substitution: braces inside slot values are never expanded.
std::string render_prompt(TemplateId id, const std::map<std::string, std::string>& slots);

class LabelNotFound : public Error {
 public:
  explicit LabelNotFound(const std::string& label) : Error("LabelNotFound(" + label + ")") {}
};

// Every label of the answer formats the prompts ask for.
const std::vector<std::string_view>& answer_labels();

inline constexpr std::string_view kCiphertextAnswer = "Ciphertext Answer:";
inline constexpr std::string_view kPlaintextAnswer = "Plaintext Answer";
inline constexpr std::string_view kEncryptedOutput = "Encrypted output:";

// Content between `label` and the next known label (or end of text), trimmed
// and unwrapped from surrounding quotes or backticks.
std::string extract_section(std::string_view response, std::string_view label);

}  // namespace cipherflow::llm
