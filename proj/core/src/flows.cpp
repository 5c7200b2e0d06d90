#include "cipherflow/flows.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <memory>

namespace cipherflow::flows {
namespace {

nlohmann::ordered_json durations_json(const StageDurations& d) {
  nlohmann::ordered_json j;
  j["rule_gen"] = d.rule_gen;
  j["enc"] = d.enc;
  j["recipient"] = d.recipient;
  j["dec"] = d.dec;
  j["total"] = d.total;
  return j;
}

}  // namespace

std::string_view to_string(ChannelKind kind) {
  return kind == ChannelKind::AgentFlow ? "agent_flow" : "encrypted_flow";
}

std::string_view to_string(Mode mode) { return mode == Mode::ED ? "ED" : "ERD"; }

bool Channel::admits(MessageTag tag) const {
  return kind_ == ChannelKind::AgentFlow ? tag == MessageTag::Ciphertext : tag == MessageTag::Rule;
}

void Channel::publish(Message message) {
  if (!admits(message.tag())) {
    throw LeakageViolation("LeakageViolation: " + std::string(to_string(message.tag())) +
                               " message from " + std::string(to_string(message.origin())) +
                               " refused by " + std::string(to_string(kind_)),
                           message.round_id(), message.origin());
  }
  log_.push_back(std::move(message));
}

std::string Channel::to_jsonl() const {
  std::string out;
  for (const auto& m : log_) {
    auto j = to_json(m);
    j["channel"] = std::string(to_string(kind_));
    out += j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

std::string comparable(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c >= 'a' && c <= 'z' ? static_cast<char>(c - 'a' + 'A') : c);
  }
  return out;
}

bool contains_plaintext(std::string_view payload, std::span<const std::string> known_plaintexts) {
  const std::string hay = comparable(payload);
  for (const auto& known : known_plaintexts) {
    const std::string needle = comparable(known);
    if (!needle.empty() && hay.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::vector<LeakageFinding> leakage_audit(std::span<const Message> agent_flow_log,
                                          std::span<const std::string> known_plaintexts) {
  std::vector<std::string> needles;
  for (const auto& k : known_plaintexts) needles.push_back(comparable(k));
  std::vector<LeakageFinding> findings;
  for (const auto& m : agent_flow_log) {
    const std::string hay = comparable(m.payload());
    for (std::size_t i = 0; i < needles.size(); ++i) {
      if (!needles[i].empty() && hay.find(needles[i]) != std::string::npos) {
        findings.push_back({m.round_id(), m.origin(), m.payload(), known_plaintexts[i]});
        break;
      }
    }
  }
  return findings;
}

nlohmann::ordered_json to_json(const RoundRecord& r, bool with_transcript) {
  nlohmann::ordered_json j;
  j["round_id"] = r.round_id;
  j["mode"] = std::string(to_string(r.mode));
  j["rule"] = r.rule ? rules::to_json(*r.rule) : nlohmann::ordered_json(nullptr);
  j["user_input"] = r.user_input;
  j["expected_output"] = r.expected_output;
  j["ciphertext_in"] = r.ciphertext_in;
  j["recipient_output"] = r.recipient_output;
  j["final_output"] = r.final_output;
  j["durations"] = durations_json(r.durations);
  nlohmann::ordered_json status;
  const auto flag = [](const std::optional<bool>& b) {
    return b ? nlohmann::ordered_json(*b) : nlohmann::ordered_json(nullptr);
  };
  status["ed_success"] = flag(r.status.ed_success);
  status["erd_success"] = flag(r.status.erd_success);
  status["failure_reason"] = r.status.failure_reason;
  j["status"] = std::move(status);
  if (r.failed_method) j["failed_method"] = std::string(cipher::method_id(*r.failed_method));
  if (!r.failed_method_text.empty()) j["failed_method_text"] = r.failed_method_text;
  if (with_transcript) {
    nlohmann::ordered_json t = nlohmann::ordered_json::array();
    for (const auto& [role, turn] : r.transcript) {
      t.push_back({{"agent", std::string(to_string(role))},
                   {"request", turn.request},
                   {"reply", turn.reply}});
    }
    j["transcript"] = std::move(t);
  }
  return j;
}

ClockSource steady_clock_source() {
  return [] {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now().time_since_epoch());
  };
}

ClockSource tick_clock_source(std::chrono::nanoseconds step) {
  auto now = std::make_shared<std::chrono::nanoseconds>(0);
  return [now, step] {
    *now += step;
    return *now;
  };
}

std::string expected_output(cipher::CipherMethod method, std::string_view user_input, Mode mode,
                            const TaskSpec& task) {
  const std::string plain = cipher::canonical_plaintext(method, user_input);
  if (mode == Mode::ED) return plain;
  const std::string result = task.kind == TaskKind::LetterFrequency
                                 ? render_frequency(cipher::letter_frequency(plain))
                                 : plain;
  return cipher::canonical_plaintext(method, result);
}

Session::Session(Backend& backend, SessionOptions options)
    : backend_(backend), options_(std::move(options)), rng_(options_.seed) {
  if (!options_.clock) options_.clock = steady_clock_source();
  validate_task(options_.task);
}

void Session::publish_ciphertext(const Message& message, std::span<const std::string> known) {
  if (message.tag() == MessageTag::Ciphertext && contains_plaintext(message.payload(), known)) {
    ++leakage_violations_;
    throw LeakageViolation("LeakageViolation: payload from " +
                               std::string(to_string(message.origin())) +
                               " contains round plaintext",
                           message.round_id(), message.origin());
  }
  try {
    agent_flow_.publish(message);
  } catch (const LeakageViolation&) {
    ++leakage_violations_;
    throw;
  }
}

void Session::clear_histories() {
  encryption_agent_.clear_dialogue();
  recipient_agent_.clear_dialogue();
  decryption_agent_.clear_dialogue();
}

RoundRecord Session::run_round(std::string_view user_input, Mode mode) {
  RoundRecord rec;
  rec.round_id = next_round_++;
  rec.mode = mode;
  rec.user_input = std::string(user_input);
  (mode == Mode::ED ? rec.status.ed_success : rec.status.erd_success) = false;

  const auto& clock = options_.clock;
  // Stage boundaries: start, after rule gen, after enc, after recipient, after dec.
  std::array<std::chrono::nanoseconds, 5> boundary{};
  boundary[0] = clock();
  std::size_t reached = 0;
  const auto mark = [&] { boundary[++reached] = clock(); };

  const auto collect = [&](Role role, const std::vector<DialogueTurn>& turns) {
    for (const auto& t : turns) rec.transcript.emplace_back(role, t);
  };

  try {
    rules::CipherRule rule;
    try {
      rule = rule_agent_.generate(backend_, rng_, options_.selector, rec.round_id);
    } catch (const RuleGenerationFailed& e) {
      collect(Role::RuleAgent, rule_agent_.take_transcript());
      rec.failed_method = e.method();
      rec.failed_method_text = e.method_text();
      throw;
    }
    collect(Role::RuleAgent, rule_agent_.take_transcript());
    rec.rule = rule;
    encrypted_flow_.publish(Message(
        rules::to_json(rule).dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace),
        MessageTag::Rule, Role::RuleAgent, rec.round_id));
    mark();

    rec.expected_output = expected_output(rule.method(), user_input, mode, options_.task);
    std::vector<std::string> known = {std::string(user_input)};
    if (mode == Mode::ERD) known.push_back(rec.expected_output);

    const Message plaintext(std::string(user_input), MessageTag::Plaintext, Role::User, rec.round_id);
    const Message ciphertext = encryption_agent_.encrypt(backend_, rule, plaintext);
    rec.ciphertext_in = ciphertext.payload();
    publish_ciphertext(ciphertext, known);
    mark();

    Message to_decrypt = ciphertext;
    if (mode == Mode::ERD) {
      const Message reply = recipient_agent_.process(backend_, rule, ciphertext, options_.task);
      rec.recipient_output = reply.payload();
      publish_ciphertext(reply, known);
      to_decrypt = reply;
    }
    mark();

    // Plaintext leaves the pipeline here, at the user boundary only.
    const Message output = decryption_agent_.decrypt(backend_, rule, to_decrypt);
    rec.final_output = output.payload();
    mark();

    const bool match = comparable(rec.final_output) == comparable(rec.expected_output);
    if (mode == Mode::ED) rec.status.ed_success = match;
    else rec.status.erd_success = match;
    if (!match) rec.status.failure_reason = "output_mismatch";
  } catch (const LeakageViolation& e) {
    rec.status.failure_reason = std::string("leakage: ") + e.what();
  } catch (const RuleGenerationFailed& e) {
    rec.status.failure_reason = std::string("rule_generation_failed: ") + e.what();
  } catch (const BackendFailure& e) {
    rec.status.failure_reason = std::string("backend_failure: ") + e.what();
  } catch (const Error& e) {
    rec.status.failure_reason = std::string("error: ") + e.what();
  }

  collect(Role::RuleAgent, rule_agent_.take_transcript());
  collect(Role::EncryptionAgent, encryption_agent_.dialogue());
  collect(Role::RecipientAgent, recipient_agent_.dialogue());
  collect(Role::DecryptionAgent, decryption_agent_.dialogue());
  clear_histories();

  const auto t_end = clock();
  // A failed stage lasts until the round ends; stages after it are empty.
  for (std::size_t k = reached + 1; k < boundary.size(); ++k) boundary[k] = t_end;
  // Offsets are truncated to whole microseconds before differencing, so the
  // stages add up exactly to the total.
  const auto offset = [&](std::chrono::nanoseconds t) {
    return std::chrono::duration_cast<std::chrono::microseconds>(t - boundary[0]).count();
  };
  const auto stage = [&](std::size_t k) {
    return static_cast<double>(offset(boundary[k + 1]) - offset(boundary[k])) / 1e6;
  };
  rec.durations.rule_gen = stage(0);
  rec.durations.enc = stage(1);
  rec.durations.recipient = stage(2);
  rec.durations.dec = stage(3);
  rec.durations.total = static_cast<double>(offset(boundary.back())) / 1e6;
  return rec;
}

}  // namespace cipherflow::flows
