#include "cipherflow/deterministic_backend.hpp"

#include <stdexcept>

namespace cipherflow {
namespace {

BackendReply echo(std::string text) { return {text, text}; }

}  // namespace

BackendReply DeterministicBackend::generate_rule_phase(const RulePhaseContext& context) {
  switch (context.phase) {
    case 1: {
      const auto method = context.method_hint.value_or(cipher::CipherMethod::Caesar);
      return echo(rules::to_string(rules::canonical_template(method).text));
    }
    case 2: {
      if (context.prior_replies.empty()) throw BackendFailure("phase 2 without a phase-1 reply");
      const auto draft = rules::parse_masked_rule(context.prior_replies.front());
      return echo(rules::render_slot_ranges(rules::canonical_template(draft.method)));
    }
    case 3: {
      if (!context.masked) throw BackendFailure("phase 3 without a masked template");
      return echo(rules::to_string(
          rules::fill_masks(context.masked->text, context.masked->slots, context.values)));
    }
    default:
      throw BackendFailure("unknown rule phase " + std::to_string(context.phase));
  }
}

BackendReply DeterministicBackend::transform(TransformRole role, const rules::CipherRule& rule,
                                             std::string_view input) {
  try {
    return echo(role == TransformRole::Encrypt ? cipher::encrypt(rule.key, input)
                                               : cipher::decrypt(rule.key, input));
  } catch (const Error& e) {
    throw BackendFailure(e.what());
  }
}

BackendReply DeterministicBackend::recipient_task(const rules::CipherRule& rule,
                                                  std::string_view ciphertext,
                                                  const TaskSpec& task) {
  try {
    const std::string plaintext = cipher::decrypt(rule.key, ciphertext);
    const std::string result = task.kind == TaskKind::LetterFrequency
                                   ? render_frequency(cipher::letter_frequency(plaintext))
                                   : plaintext;
    return echo(cipher::encrypt(rule.key, result));
  } catch (const Error& e) {
    throw BackendFailure(e.what());
  }
}

FaultInjectingBackend::FaultInjectingBackend(Backend& inner, std::set<cipher::CipherMethod> methods,
                                             std::set<Stage> stages)
    : inner_(inner), methods_(std::move(methods)), stages_(std::move(stages)) {}

BackendReply FaultInjectingBackend::generate_rule_phase(const RulePhaseContext& context) {
  return inner_.generate_rule_phase(context);
}

BackendReply FaultInjectingBackend::transform(TransformRole role, const rules::CipherRule& rule,
                                              std::string_view input) {
  BackendReply reply = inner_.transform(role, rule, input);
  const Stage stage = role == TransformRole::Encrypt ? Stage::Encrypt : Stage::Decrypt;
  if (methods_.contains(rule.method()) && stages_.contains(stage)) return corrupt(std::move(reply));
  return reply;
}

BackendReply FaultInjectingBackend::recipient_task(const rules::CipherRule& rule,
                                                   std::string_view ciphertext,
                                                   const TaskSpec& task) {
  BackendReply reply = inner_.recipient_task(rule, ciphertext, task);
  if (methods_.contains(rule.method()) && stages_.contains(Stage::Recipient)) {
    return corrupt(std::move(reply));
  }
  return reply;
}

// Moves every letter one place along the alphabet, so the answer stays
// plausible-looking but never matches.
BackendReply FaultInjectingBackend::corrupt(BackendReply reply) const {
  bool changed = false;
  for (auto& c : reply.text) {
    if (c >= 'A' && c <= 'Z') {
      c = c == 'Z' ? 'A' : static_cast<char>(c + 1);
      changed = true;
    } else if (c >= 'a' && c <= 'z') {
      c = c == 'z' ? 'a' : static_cast<char>(c + 1);
      changed = true;
    }
  }
  if (!changed) reply.text += "?";
  reply.raw = reply.text;
  return reply;
}

}  // namespace cipherflow
