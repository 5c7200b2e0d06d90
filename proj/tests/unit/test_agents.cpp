#include <gtest/gtest.h>

#include "cipherflow/agents.hpp"
#include "cipherflow/deterministic_backend.hpp"
#include "fakes.hpp"

using namespace cipherflow;
using cipher::CipherMethod;

TEST(MethodSelector, WeightsValidated) {
  EXPECT_THROW(MethodSelector::weighted({0, 0, 0, 0, 0}), std::invalid_argument);
  EXPECT_THROW(MethodSelector::weighted({1, -1, 0, 0, 0}), std::invalid_argument);
  Rng rng(1);
  const auto only = MethodSelector::only(CipherMethod::Atbash);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(only.draw(rng), CipherMethod::Atbash);
}

TEST(RuleAgent, DeterministicRulesForEveryMethod) {
  DeterministicBackend backend;
  for (const auto m : cipher::kAllMethods) {
    const auto rule = rule_agent_generate(backend, 17, MethodSelector::only(m));
    EXPECT_EQ(rule.method(), m);
    EXPECT_NO_THROW(cipher::validate_key(rule.key));
    EXPECT_EQ(rule.provenance.rfind("engine-filled; seed=17", 0), 0u);
  }
}

TEST(RuleAgent, SameSeedSameRule) {
  DeterministicBackend backend;
  const auto a = rule_agent_generate(backend, 123, MethodSelector::uniform());
  const auto b = rule_agent_generate(backend, 123, MethodSelector::uniform());
  EXPECT_EQ(a.key, b.key);
  EXPECT_EQ(a.text, b.text);
}

TEST(RuleAgent, MemoryIsAppendOnlyAndDialogueIsCleared) {
  DeterministicBackend backend;
  RuleAgent agent;
  Rng rng(4);
  for (std::uint64_t round = 1; round <= 3; ++round) {
    agent.generate(backend, rng, MethodSelector::uniform(), round);
    EXPECT_TRUE(agent.dialogue().empty());
    const auto transcript = agent.take_transcript();
    EXPECT_EQ(transcript.size(), 3u);
    EXPECT_TRUE(agent.take_transcript().empty());
  }
  ASSERT_EQ(agent.memory().entries().size(), 3u);
  EXPECT_EQ(agent.memory().entries()[2].round_id, 3u);
}

TEST(RuleAgent, PhasesShareOneConversation) {
  fakes::ScriptedRuleBackend backend;
  rule_agent_generate(backend, 9, MethodSelector::only(CipherMethod::Caesar));
  ASSERT_EQ(backend.seen.size(), 3u);
  EXPECT_TRUE(backend.seen[0].prior_replies.empty());
  EXPECT_EQ(backend.seen[1].prior_replies.size(), 1u);
  EXPECT_EQ(backend.seen[2].prior_replies.size(), 2u);
  EXPECT_TRUE(backend.seen[2].masked.has_value());
  EXPECT_EQ(backend.seen[2].values.size(), 1u);
}

TEST(RuleAgent, RetriesAnUnusableReply) {
  fakes::ScriptedRuleBackend backend;
  const std::string good = rules::to_string(rules::canonical_template(CipherMethod::Caesar).text);
  backend.phase_replies[0] = {"I would rather not.", good};
  const auto rule = rule_agent_generate(backend, 2, MethodSelector::only(CipherMethod::Caesar));
  EXPECT_EQ(rule.method(), CipherMethod::Caesar);
  EXPECT_EQ(backend.seen.size(), 4u);
}

TEST(RuleAgent, GivesUpAfterBoundedRetries) {
  fakes::ScriptedRuleBackend backend;
  backend.phase_replies[0] = {"Encryption Method Chosen: Enigma\nRule: r\nProcess: p\nKey: k"};
  try {
    rule_agent_generate(backend, 2, MethodSelector::uniform());
    FAIL();
  } catch (const RuleGenerationFailed& e) {
    EXPECT_EQ(e.last_failure().phase(), 1);
    EXPECT_FALSE(e.method().has_value());
    EXPECT_EQ(e.method_text(), "Enigma");
  }
  EXPECT_EQ(backend.seen.size(), static_cast<std::size_t>(RuleAgent::kMaxRetriesPerPhase + 1));
}

TEST(RuleAgent, ModelFilledValuesAreParsed) {
  fakes::ScriptedRuleBackend backend;
  backend.model_fills = true;
  backend.phase_replies[2] = {
      "Encryption Method Chosen: Caesar Cipher\nRule: shift\nProcess: shift\nKey: shift: 21"};
  const auto rule = rule_agent_generate(backend, 2, MethodSelector::only(CipherMethod::Caesar));
  EXPECT_EQ(rule.key, cipher::KeyMaterial{cipher::CaesarKey{21}});
  EXPECT_EQ(rule.provenance, "model-filled");
}

TEST(WorkerAgents, RejectWrongTags) {
  DeterministicBackend backend;
  const auto rule = rules::make_rule(cipher::CaesarKey{3});
  EncryptionAgent enc;
  DecryptionAgent dec;
  RecipientAgent rec;
  const Message cipher_msg("KHOOR", MessageTag::Ciphertext, Role::EncryptionAgent, 1);
  const Message plain_msg("HELLO", MessageTag::Plaintext, Role::User, 1);
  EXPECT_THROW(enc.encrypt(backend, rule, cipher_msg), std::invalid_argument);
  EXPECT_THROW(dec.decrypt(backend, rule, plain_msg), std::invalid_argument);
  EXPECT_THROW(rec.process(backend, rule, plain_msg, TaskSpec::letter_frequency()),
               std::invalid_argument);
  TaskSpec empty = TaskSpec::letter_frequency();
  empty.description = "  ";
  EXPECT_THROW(rec.process(backend, rule, cipher_msg, empty), std::invalid_argument);
}

TEST(WorkerAgents, FreeFunctions) {
  DeterministicBackend backend;
  const auto rule = rules::make_rule(cipher::CaesarKey{3});
  const auto c = encryption_agent_encrypt(backend, rule, "hello");
  EXPECT_EQ(c.payload(), "KHOOR");
  EXPECT_EQ(c.tag(), MessageTag::Ciphertext);
  const auto p = decryption_agent_decrypt(backend, rule, "KHOOR");
  EXPECT_EQ(p.payload(), "HELLO");
  EXPECT_EQ(p.tag(), MessageTag::Plaintext);
  // Frequency of "HELLO" is E:1 H:1 L:2 O:1, returned encrypted.
  const auto r = recipient_agent_process(backend, rule, "KHOOR", TaskSpec::letter_frequency());
  EXPECT_EQ(r.payload(), cipher::encrypt(rule.key, "E:1 H:1 L:2 O:1"));
  EXPECT_EQ(r.origin(), Role::RecipientAgent);
}

TEST(FaultInjection, CorruptsOnlyChosenMethods) {
  DeterministicBackend inner;
  FaultInjectingBackend faulty(inner, {CipherMethod::Playfair});
  const auto caesar = rules::make_rule(cipher::CaesarKey{3});
  const auto playfair = rules::make_rule(cipher::PlayfairKey{"MONARCHY"});
  EXPECT_EQ(faulty.transform(TransformRole::Decrypt, caesar, "KHOOR").text, "HELLO");
  const auto c = inner.transform(TransformRole::Encrypt, playfair, "HELLO").text;
  EXPECT_NE(faulty.transform(TransformRole::Decrypt, playfair, c).text,
            cipher::playfair_normalize("HELLO"));
}
