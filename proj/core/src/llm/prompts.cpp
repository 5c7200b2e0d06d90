#include "cipherflow/llm/prompts.hpp"

#include <algorithm>
#include <cctype>

#include "cipherflow/sections.hpp"

namespace cipherflow::llm {
namespace {

// Transcribed line by line from the published prompt tables. A bold label
// directly followed by italic guidance is joined without a space, as typeset.
constexpr std::string_view kRulePhase1 =
    "You are an expert in creating encryption rules. Your task is to design a specific "
    "encryption scheme for natural language. First, select an encryption rule. The rule can "
    "be a classical encryption method. You are encouraged to use your imagination, but you "
    "can only select one encryption rule. In your response, only mention the chosen "
    "algorithm and the encryption process. All numbers involved in your explanation must be "
    "represented by a mask. Please use simple language. Please use the following format for "
    "your response:\n"
    "Encryption Method Chosen:The type of encryption rule you choose\n"
    "Rule:Rules of the encryption algorithm\n"
    "Process:Specific steps of encryption\n"
    "Key:Key or other specific encryption characteristics and details";

constexpr std::string_view kRulePhase2 =
    "Great job! Now, think about the possible range and values of all the numbers "
    "represented by masks in your chosen encryption rule.";

constexpr std::string_view kRulePhase3 =
    "Well done! Next, please randomly generate numbers within the specified range, fill the "
    "selected numbers into the encryption rules you\xE2\x80\x99ve established, and generate the "
    "complete encryption rule. Output the result using the following format:\n"
    "Encryption Method Chosen:\n"
    "Rule:\n"
    "Process:\n"
    "Key:";

constexpr std::string_view kEncrypt =
    "You are a natural language encryption expert. Your task is to encrypt my plain text "
    "based on the encryption rules. Carefully read and understand each encryption rule, and "
    "for each rule, you need to convert it into the corresponding encryption method. Then, "
    "use these methods to encrypt the plaintext and output the ciphertext.\n"
    "Encryption Rules:{rules}\n"
    "Plaintext:{plaintext}\n"
    "Your answer should follow this format:\n"
    "Reasoning Process:\n"
    "Ciphertext Answer:";

constexpr std::string_view kDecrypt =
    "You are a decryption expert, and your task is to decrypt my ciphertext based on the "
    "provided encryption rules. Carefully review each rule, and for every rule, devise an "
    "appropriate decryption method. Once you have identified the decryption methods, apply "
    "them to the ciphertext to produce the plaintext.\n"
    "Encryption Rules:{rules}\n"
    "Ciphertext:{ciphertext}\n"
    "Your answer should follow this format:\n"
    "Reasoning Process:\n"
    "Plaintext Answer";

constexpr std::string_view kRecipient =
    "You are an encryption and decryption expert, your task is to restore the ciphertext "
    "input according to the encryption rules, then operate on the plaintext, and finally "
    "need to use the encryption rules to encrypt your results.\n"
    "Encryption Rules:{rules}\n"
    "Ciphertext input:{ciphertext}\n"
    "At the same time, you are also {role}, your task is to {task}\n"
    "Your output should also be encrypted using encryption rules. Your task chain is: first "
    "decrypt my ciphertext input, next, perform {task_name}, and finally encrypt and output "
    "your results. Your output should be in the following format:\n"
    "Decryption Thinking:\n"
    "Enter plaintext:\n"
    "Working on plaintext:\n"
    "Work result:\n"
    "Crypto thinking:\n"
    "Encrypted output:";

bool is_slot_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Finds "{name}" at pos; returns the name length or 0.
std::size_t slot_at(std::string_view body, std::size_t pos) {
  if (body[pos] != '{') return 0;
  std::size_t end = pos + 1;
  while (end < body.size() && is_slot_char(body[end])) ++end;
  if (end == pos + 1 || end >= body.size() || body[end] != '}') return 0;
  return end - pos - 1;
}

}  // namespace

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::RulePhase1: return "rule_phase1";
    case TemplateId::RulePhase2: return "rule_phase2";
    case TemplateId::RulePhase3: return "rule_phase3";
    case TemplateId::Encrypt: return "encrypt";
    case TemplateId::Decrypt: return "decrypt";
    case TemplateId::Recipient: return "recipient";
  }
  return "";
}

std::string_view template_body(TemplateId id) {
  switch (id) {
    case TemplateId::RulePhase1: return kRulePhase1;
    case TemplateId::RulePhase2: return kRulePhase2;
    case TemplateId::RulePhase3: return kRulePhase3;
    case TemplateId::Encrypt: return kEncrypt;
    case TemplateId::Decrypt: return kDecrypt;
    case TemplateId::Recipient: return kRecipient;
  }
  return {};
}

std::vector<std::string> template_slots(TemplateId id) {
  const std::string_view body = template_body(id);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (const std::size_t n = slot_at(body, i)) {
      std::string name(body.substr(i + 1, n));
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
      i += n + 1;
    }
  }
  return names;
}

std::string render_prompt(TemplateId id, const std::map<std::string, std::string>& slots) {
  const std::string_view body = template_body(id);
  for (const auto& name : template_slots(id)) {
    if (!slots.contains(name)) throw MissingSlot(name);
  }
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (const std::size_t n = slot_at(body, i)) {
      out += slots.at(std::string(body.substr(i + 1, n)));
      i += n + 1;
    } else {
      out.push_back(body[i]);
    }
  }
  return out;
}

const std::vector<std::string_view>& answer_labels() {
  static const std::vector<std::string_view> labels = {
      "Reasoning Process:", kCiphertextAnswer,     kPlaintextAnswer,  "Decryption Thinking:",
      "Enter plaintext:",   "Working on plaintext:", "Work result:",    "Crypto thinking:",
      kEncryptedOutput};
  return labels;
}

std::string extract_section(std::string_view response, std::string_view label) {
  auto content = rules::section_content(response, label, answer_labels());
  if (!content) throw LabelNotFound(std::string(label));
  std::string text = std::move(*content);
  for (const char q : {'"', '`', '\''}) {
    if (text.size() >= 2 && text.front() == q && text.back() == q) {
      return text.substr(1, text.size() - 2);
    }
  }
  // Transposition ciphertext may end in spaces. Keep spaces that close the
  // answer's last line rather than losing them to trimming.
  if (const auto at = response.rfind(text); at != std::string_view::npos) {
    std::size_t end = at + text.size();
    while (end < response.size() && response[end] == ' ') ++end;
    if (end == response.size() || response[end] == '\n' || response[end] == '\r') {
      text.append(end - at - text.size(), ' ');
    }
  }
  return text;
}

}  // namespace cipherflow::llm
