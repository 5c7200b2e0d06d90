#pragma once

#include <set>

#include "cipherflow/backend.hpp"

namespace cipherflow {

// Reference backend: answers every request with the cipher-core result and
// speaks the canonical rule-text protocol. Stateless.
class DeterministicBackend : public Backend {
 public:
  std::string_view name() const override { return "deterministic"; }

  BackendReply generate_rule_phase(const RulePhaseContext& context) override;
  BackendReply transform(TransformRole role, const rules::CipherRule& rule,
                         std::string_view input) override;
  BackendReply recipient_task(const rules::CipherRule& rule, std::string_view ciphertext,
                              const TaskSpec& task) override;
};

// Wraps another backend and corrupts its answers for chosen methods, so the
// harness can be shown a failing column.
class FaultInjectingBackend : public Backend {
 public:
  enum class Stage { Encrypt, Decrypt, Recipient };

  FaultInjectingBackend(Backend& inner, std::set<cipher::CipherMethod> methods,
                        std::set<Stage> stages = {Stage::Decrypt});

  std::string_view name() const override { return "fault-injected"; }
  bool fills_numbers() const override { return inner_.fills_numbers(); }

  BackendReply generate_rule_phase(const RulePhaseContext& context) override;
  BackendReply transform(TransformRole role, const rules::CipherRule& rule,
                         std::string_view input) override;
  BackendReply recipient_task(const rules::CipherRule& rule, std::string_view ciphertext,
                              const TaskSpec& task) override;

 private:
  BackendReply corrupt(BackendReply reply) const;

  Backend& inner_;
  std::set<cipher::CipherMethod> methods_;
  std::set<Stage> stages_;
};

}  // namespace cipherflow
