#include "cipherflow/agents.hpp"

#include <stdexcept>

#include "cipherflow/sections.hpp"

namespace cipherflow {

TaskSpec TaskSpec::letter_frequency() {
  return TaskSpec{
      "Decrypt the ciphertext with the encryption rules, count how often each letter occurs "
      "in the plaintext, and return the counts encrypted with the same rules.",
      TaskKind::LetterFrequency, "a letter statistician",
      "count each letter in the plaintext and the number of times it appears",
      "letter statistics"};
}

TaskSpec TaskSpec::echo() {
  return TaskSpec{"Decrypt the ciphertext and return the same plaintext encrypted again.",
                  TaskKind::Echo, "a faithful relay",
                  "repeat the plaintext exactly as it is", "plaintext relay"};
}

void validate_task(const TaskSpec& task) {
  if (rules::trim(task.description).empty()) {
    throw std::invalid_argument("task description must not be empty");
  }
}

std::string engine_values_instruction(const RulePhaseContext& context) {
  if (!context.masked || context.values.empty()) return {};
  std::string out = "Use exactly these values for the masks: ";
  const auto& slots = context.masked->slots;
  for (std::size_t i = 0; i < context.values.size() && i < slots.size(); ++i) {
    if (i) out += ", ";
    out += slots[i].token + " = " + rules::to_string(context.values[i]);
  }
  out += ".";
  return out;
}

std::string render_frequency(const std::map<char, std::size_t>& counts) {
  std::string out;
  for (const auto& [letter, count] : counts) {
    if (!out.empty()) out.push_back(' ');
    out.push_back(letter);
    out.push_back(':');
    out += std::to_string(count);
  }
  return out;
}

// --- method selection ------------------------------------------------------

MethodSelector MethodSelector::uniform() { return MethodSelector({1, 1, 1, 1, 1}); }

MethodSelector MethodSelector::weighted(const std::array<double, 5>& weights) {
  double total = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw std::invalid_argument("method weights must be non-negative");
    total += w;
  }
  if (!(total > 0)) throw std::invalid_argument("at least one method weight must be positive");
  return MethodSelector(weights);
}

MethodSelector MethodSelector::only(cipher::CipherMethod method) {
  std::array<double, 5> w{};
  w[static_cast<std::size_t>(method)] = 1.0;
  return MethodSelector(w);
}

cipher::CipherMethod MethodSelector::draw(Rng& rng) const {
  return cipher::kAllMethods[rng.weighted_index(weights_)];
}

// --- rule agent ----------------------------------------------------------

void RuleAgentMemory::record(std::uint64_t round_id, rules::CipherRule rule) {
  entries_.push_back({round_id, std::move(rule)});
}

namespace {

std::string describe_request(const RulePhaseContext& ctx, bool model_fills) {
  std::string out = "rule phase " + std::to_string(ctx.phase);
  if (ctx.method_hint) out += " hint=" + std::string(cipher::method_id(*ctx.method_hint));
  if (const std::string line = engine_values_instruction(ctx); !model_fills && !line.empty()) {
    out += "\n" + line;
  }
  return out;
}

}  // namespace

rules::CipherRule RuleAgent::generate(Backend& backend, Rng& rng, const MethodSelector& selector,
                                      std::uint64_t round_id) {
  dialogue_.clear();
  transcript_.clear();
  RulePhaseContext ctx;
  ctx.method_hint = selector.draw(rng);

  std::optional<cipher::CipherMethod> named_method;
  std::string method_text;

  // Runs one phase with bounded retries. `parse` throws on an unusable reply.
  const auto run_phase = [&](int phase, const auto& parse) {
    ctx.phase = phase;
    std::optional<PhaseParseFailure> last;
    for (int attempt = 0; attempt <= kMaxRetriesPerPhase; ++attempt) {
      if (phase == 3) {
        ctx.values = rules::draw_slot_values(*ctx.masked, rng);
      }
      const BackendReply reply = backend.generate_rule_phase(ctx);
      dialogue_.push_back({describe_request(ctx, backend.fills_numbers()), reply.raw});
      try {
        parse(reply);
        return reply;
      } catch (const rules::RuleParseError& e) {
        last.emplace(phase, e.what());
      } catch (const rules::TemplateError& e) {
        last.emplace(phase, e.what());
      } catch (const rules::SlotError& e) {
        last.emplace(phase, e.what());
      } catch (const cipher::InvalidKey& e) {
        last.emplace(phase, e.what());
      }
    }
    transcript_ = std::exchange(dialogue_, {});
    throw RuleGenerationFailed(*last, named_method, method_text);
  };

  rules::MaskedRuleDraft draft;
  // Whatever happens, the working context does not outlive this call.
  struct DialogueReset {
    RuleAgent& agent;
    ~DialogueReset() {
      if (!agent.dialogue_.empty()) agent.transcript_ = std::exchange(agent.dialogue_, {});
    }
  } reset{*this};

  const BackendReply first = run_phase(1, [&](const BackendReply& reply) {
    if (auto m = rules::section_content(reply.text, rules::kMethodLabel, rules::kRuleLabels)) {
      method_text = *m;
      try {
        named_method = rules::identify_method(*m);
      } catch (const rules::RuleParseError&) {
        named_method.reset();
      }
    }
    draft = rules::parse_masked_rule(reply.text);
  });
  ctx.prior_replies.push_back(first.raw);

  const BackendReply second = run_phase(2, [&](const BackendReply& reply) {
    ctx.masked = rules::parse_slot_ranges(draft, reply.text);
  });
  ctx.prior_replies.push_back(second.raw);

  rules::CipherRule rule;
  run_phase(3, [&](const BackendReply& reply) {
    if (backend.fills_numbers()) {
      rule = rules::parse_rule(reply.text);
      rule.provenance = "model-filled";
    } else {
      std::string provenance = "engine-filled; seed=" + std::to_string(rng.seed()) + "; values=";
      for (std::size_t i = 0; i < ctx.values.size(); ++i) {
        if (i) provenance += ",";
        provenance += rules::to_string(ctx.values[i]);
      }
      rule = rules::apply_slots(*ctx.masked, ctx.values, std::move(provenance));
    }
  });

  rule.round_id = round_id;
  memory_.record(round_id, rule);
  transcript_ = std::exchange(dialogue_, {});
  return rule;
}

rules::CipherRule rule_agent_generate(Backend& backend, std::uint64_t seed,
                                      const MethodSelector& selector) {
  RuleAgent agent;
  Rng rng(seed);
  return agent.generate(backend, rng, selector, 0);
}

// --- worker agents ---------------------------------------------------------

void WorkerAgent::remember(std::string request, const BackendReply& reply) {
  dialogue_.push_back({std::move(request), reply.raw});
}

Message EncryptionAgent::encrypt(Backend& backend, const rules::CipherRule& rule,
                                 const Message& plaintext) {
  if (plaintext.tag() != MessageTag::Plaintext) {
    throw std::invalid_argument("encryption agent expects a plaintext message");
  }
  const BackendReply reply = backend.transform(TransformRole::Encrypt, rule, plaintext.payload());
  remember("encrypt", reply);
  return Message(reply.text, MessageTag::Ciphertext, Role::EncryptionAgent, plaintext.round_id());
}

Message DecryptionAgent::decrypt(Backend& backend, const rules::CipherRule& rule,
                                 const Message& ciphertext) {
  if (ciphertext.tag() != MessageTag::Ciphertext) {
    throw std::invalid_argument("decryption agent expects a ciphertext message");
  }
  const BackendReply reply = backend.transform(TransformRole::Decrypt, rule, ciphertext.payload());
  remember("decrypt", reply);
  return Message(reply.text, MessageTag::Plaintext, Role::DecryptionAgent, ciphertext.round_id());
}

Message RecipientAgent::process(Backend& backend, const rules::CipherRule& rule,
                                const Message& ciphertext, const TaskSpec& task) {
  validate_task(task);
  if (ciphertext.tag() != MessageTag::Ciphertext) {
    throw std::invalid_argument("recipient agent expects a ciphertext message");
  }
  const BackendReply reply = backend.recipient_task(rule, ciphertext.payload(), task);
  remember("recipient", reply);
  return Message(reply.text, MessageTag::Ciphertext, Role::RecipientAgent, ciphertext.round_id());
}

Message encryption_agent_encrypt(Backend& backend, const rules::CipherRule& rule,
                                 std::string_view plaintext) {
  EncryptionAgent agent;
  return agent.encrypt(backend, rule,
                       Message(std::string(plaintext), MessageTag::Plaintext, Role::User, rule.round_id));
}

Message decryption_agent_decrypt(Backend& backend, const rules::CipherRule& rule,
                                 std::string_view ciphertext) {
  DecryptionAgent agent;
  return agent.decrypt(backend, rule,
                       Message(std::string(ciphertext), MessageTag::Ciphertext,
                               Role::RecipientAgent, rule.round_id));
}

Message recipient_agent_process(Backend& backend, const rules::CipherRule& rule,
                                std::string_view ciphertext, const TaskSpec& task) {
  RecipientAgent agent;
  return agent.process(backend, rule,
                       Message(std::string(ciphertext), MessageTag::Ciphertext,
                               Role::EncryptionAgent, rule.round_id),
                       task);
}

}  // namespace cipherflow
