#include <gtest/gtest.h>

#include "../support/oracles.hpp"
#include "cipherflow/deterministic_backend.hpp"
#include "cipherflow/flows.hpp"
#include "fakes.hpp"

using namespace cipherflow;
using namespace cipherflow::flows;
using cipher::CipherMethod;

TEST(Channel, AdmitsOnlyItsTag) {
  Channel agent(ChannelKind::AgentFlow);
  Channel enc(ChannelKind::EncryptedFlow);
  EXPECT_NO_THROW(agent.publish(Message("X", MessageTag::Ciphertext, Role::EncryptionAgent, 1)));
  EXPECT_THROW(agent.publish(Message("hi", MessageTag::Plaintext, Role::User, 1)), LeakageViolation);
  EXPECT_THROW(agent.publish(Message("{}", MessageTag::Rule, Role::RuleAgent, 1)), LeakageViolation);
  EXPECT_THROW(enc.publish(Message("X", MessageTag::Ciphertext, Role::EncryptionAgent, 1)),
               LeakageViolation);
  EXPECT_EQ(agent.log().size(), 1u);
  EXPECT_TRUE(enc.log().empty());
  try {
    agent.publish(Message("hi", MessageTag::Plaintext, Role::User, 4));
  } catch (const LeakageViolation& e) {
    EXPECT_EQ(e.round_id(), 4u);
    EXPECT_EQ(e.origin(), Role::User);
  }
}

TEST(Channel, JsonLines) {
  Channel agent(ChannelKind::AgentFlow);
  agent.publish(Message("KHOOR", MessageTag::Ciphertext, Role::EncryptionAgent, 2));
  const auto line = nlohmann::json::parse(agent.to_jsonl());
  EXPECT_EQ(line.at("channel"), "agent_flow");
  EXPECT_EQ(line.at("tag"), "ciphertext");
  EXPECT_EQ(line.at("origin"), "encryption_agent");
}

TEST(LeakageAudit, FindsNormalizedPlaintext) {
  const std::vector<Message> log = {
      Message("KHOOR", MessageTag::Ciphertext, Role::EncryptionAgent, 1),
      Message("note: hello   world!", MessageTag::Ciphertext, Role::RecipientAgent, 2)};
  const std::vector<std::string> known = {"Hello world", ""};
  const auto findings = leakage_audit(log, known);
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].round_id, 2u);
  EXPECT_EQ(findings[0].matched, "Hello world");
}

TEST(Session, EdRoundSucceedsForEveryMethod) {
  DeterministicBackend backend;
  for (const auto m : cipher::kAllMethods) {
    SessionOptions o;
    o.seed = 3;
    o.selector = MethodSelector::only(m);
    Session s(backend, o);
    const auto r = s.run_round("Meet me at the old mill at 9.", Mode::ED);
    EXPECT_EQ(r.status.ed_success, true) << cipher::method_id(m) << ": " << r.status.failure_reason;
    EXPECT_FALSE(r.status.erd_success.has_value());
    EXPECT_EQ(r.final_output, cipher::canonical_plaintext(m, "Meet me at the old mill at 9."));
    ASSERT_TRUE(r.rule.has_value());
    EXPECT_EQ(r.rule->method(), m);
  }
}

TEST(Session, ErdMatchesFrequencyOracle) {
  DeterministicBackend backend;
  SessionOptions o;
  o.seed = 8;
  o.selector = MethodSelector::only(CipherMethod::Vigenere);
  Session s(backend, o);
  const auto r = s.run_round("Attack at dawn", Mode::ERD);
  EXPECT_EQ(r.status.erd_success, true);
  EXPECT_EQ(r.final_output, oracle::frequency("Attack at dawn"));
  EXPECT_NE(r.recipient_output, r.final_output);
}

TEST(Session, ChannelsCarryTheRightMessages) {
  DeterministicBackend backend;
  Session s(backend, {});
  s.run_round("hello there", Mode::ERD);
  s.run_round("general", Mode::ED);
  EXPECT_EQ(s.encrypted_flow().log().size(), 2u);
  EXPECT_EQ(s.agent_flow().log().size(), 3u);
  for (const auto& m : s.agent_flow().log()) EXPECT_EQ(m.tag(), MessageTag::Ciphertext);
  for (const auto& m : s.encrypted_flow().log()) EXPECT_EQ(m.tag(), MessageTag::Rule);
  EXPECT_EQ(s.rounds_run(), 2u);
}

TEST(Session, HistoriesClearedEachRound) {
  DeterministicBackend backend;
  Session s(backend, {});
  const auto r = s.run_round("clear me", Mode::ERD);
  EXPECT_TRUE(s.encryption_agent().dialogue().empty());
  EXPECT_TRUE(s.recipient_agent().dialogue().empty());
  EXPECT_TRUE(s.decryption_agent().dialogue().empty());
  EXPECT_TRUE(s.rule_agent().dialogue().empty());
  EXPECT_EQ(r.transcript.size(), 6u);  // three rule phases, enc, recipient, dec
  EXPECT_EQ(s.rule_agent().memory().size(), 1u);
}

TEST(Session, LeakyEncryptionAbortsRound) {
  fakes::LeakyBackend backend;
  backend.leak_on_calls = {2};
  Session s(backend, {});
  EXPECT_TRUE(s.run_round("first message", Mode::ED).status.failure_reason.empty());
  const auto r = s.run_round("second message", Mode::ED);
  EXPECT_EQ(r.status.ed_success, false);
  EXPECT_EQ(r.status.failure_reason.rfind("leakage: LeakageViolation", 0), 0u);
  EXPECT_EQ(s.leakage_violations(), 1u);
  EXPECT_TRUE(r.final_output.empty());
  // The leaking payload never reached the log.
  const std::vector<std::string> known = {"first message", "second message"};
  EXPECT_TRUE(leakage_audit(s.agent_flow().log(), known).empty());
}

TEST(Session, LeakyRecipientIsCaught) {
  fakes::LeakyBackend backend;
  backend.leak_recipient = true;
  Session s(backend, {});
  const auto r = s.run_round("count these letters", Mode::ERD);
  EXPECT_EQ(r.status.erd_success, false);
  EXPECT_NE(r.status.failure_reason.find("leakage"), std::string::npos);
  EXPECT_EQ(s.leakage_violations(), 1u);
}

TEST(Session, BackendFailureIsRecorded) {
  DeterministicBackend inner;
  FaultInjectingBackend faulty(inner, {CipherMethod::Caesar});
  SessionOptions o;
  o.selector = MethodSelector::only(CipherMethod::Caesar);
  Session s(faulty, o);
  const auto r = s.run_round("abc", Mode::ED);
  EXPECT_EQ(r.status.failure_reason, "output_mismatch");
}

TEST(Session, RuleFailureKeepsTheRoundRecord) {
  fakes::ScriptedRuleBackend backend;
  backend.phase_replies[0] = {"no format at all"};
  Session s(backend, {});
  const auto r = s.run_round("abc", Mode::ED);
  EXPECT_EQ(r.status.failure_reason.rfind("rule_generation_failed: ", 0), 0u);
  EXPECT_FALSE(r.rule.has_value());
  EXPECT_EQ(r.transcript.size(), static_cast<std::size_t>(RuleAgent::kMaxRetriesPerPhase + 1));
}

TEST(Timing, StagesAreNonNegativeAndSumToTotal) {
  DeterministicBackend backend;
  Session s(backend, {});
  for (int i = 0; i < 50; ++i) {
    const auto r = s.run_round("time this round", i % 2 ? Mode::ERD : Mode::ED);
    const auto& d = r.durations;
    for (double v : {d.rule_gen, d.enc, d.recipient, d.dec, d.total}) ASSERT_GE(v, 0.0);
    ASSERT_NEAR(d.rule_gen + d.enc + d.recipient + d.dec, d.total, 1e-9);
    ASSERT_LT(d.total, 0.05);
  }
}

TEST(Timing, TickClockIsExact) {
  DeterministicBackend backend;
  SessionOptions o;
  o.clock = tick_clock_source(std::chrono::milliseconds(1));
  Session s(backend, o);
  const auto r = s.run_round("tick", Mode::ERD);
  EXPECT_DOUBLE_EQ(r.durations.rule_gen, 0.001);
  EXPECT_DOUBLE_EQ(r.durations.enc, 0.001);
  EXPECT_DOUBLE_EQ(r.durations.recipient, 0.001);
  EXPECT_DOUBLE_EQ(r.durations.dec, 0.001);
  EXPECT_DOUBLE_EQ(r.durations.total, 0.004);
  const auto ed = s.run_round("tick", Mode::ED);
  EXPECT_DOUBLE_EQ(ed.durations.recipient, 0.001);  // the boundary is still read
}

TEST(RoundRecord, JsonShape) {
  DeterministicBackend backend;
  Session s(backend, {});
  const auto j = to_json(s.run_round("shape", Mode::ED), true);
  for (const char* key : {"round_id", "mode", "rule", "user_input", "expected_output",
                          "ciphertext_in", "recipient_output", "final_output", "durations",
                          "status", "transcript"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_TRUE(j["status"]["erd_success"].is_null());
  EXPECT_EQ(j["status"]["ed_success"], true);
}
