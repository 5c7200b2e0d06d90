#include "fakes.hpp"

#include <nlohmann/json.hpp>

#include "cipherflow/rules.hpp"

namespace fakes {
namespace {

namespace cf = cipherflow;

// Text strictly between `from` and the next occurrence of `to`.
std::string between(const std::string& text, const std::string& from, const std::string& to) {
  const auto b = text.find(from);
  if (b == std::string::npos) return {};
  const auto start = b + from.size();
  const auto e = text.find(to, start);
  return text.substr(start, e == std::string::npos ? std::string::npos : e - start);
}

}  // namespace

std::string completion_body(const std::string& content) {
  nlohmann::json j;
  j["id"] = "cmpl-test";
  j["choices"] = {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}};
  return j.dump();
}

cipherflow::llm::HttpResponse SimulatedModelTransport::post(
    const cipherflow::llm::HttpRequest& request) {
  bodies.push_back(request.body);
  const auto j = nlohmann::json::parse(request.body);
  const auto& messages = j.at("messages");
  const std::string last = messages.back().at("content").get<std::string>();
  std::string reply;

  if (last.rfind("You are an expert in creating encryption rules", 0) == 0) {
    reply = cf::rules::to_string(cf::rules::canonical_template(method_).text);
  } else if (last.rfind("Great job!", 0) == 0) {
    reply = cf::rules::render_slot_ranges(cf::rules::canonical_template(method_));
  } else if (last.rfind("Well done!", 0) == 0) {
    // Fill from the engine's instruction line when present.
    const auto tmpl = cf::rules::canonical_template(method_);
    std::vector<cf::rules::SlotValue> values;
    for (const auto& slot : tmpl.slots) {
      const std::string v = between(last, slot.token + " = ", ".");
      if (std::holds_alternative<cf::rules::IntRange>(slot.range)) values.emplace_back(std::stoll(v));
      else values.emplace_back(v);
    }
    reply = cf::rules::to_string(cf::rules::fill_masks(tmpl.text, tmpl.slots, values));
  } else {
    const std::string rule_text = between(last, "Encryption Rules:", "\nCiphertext");
    const std::string rules_for_plain = between(last, "Encryption Rules:", "\nPlaintext:");
    if (last.rfind("You are a natural language encryption expert", 0) == 0) {
      const auto rule = cf::rules::parse_rule(rules_for_plain);
      const std::string plain = between(last, "\nPlaintext:", "\nYour answer");
      reply = "Reasoning Process: apply the rule.\nCiphertext Answer: " +
              cf::cipher::encrypt(rule.key, plain);
    } else if (last.rfind("You are a decryption expert", 0) == 0) {
      const auto rule = cf::rules::parse_rule(rule_text);
      const std::string ct = between(last, "\nCiphertext:", "\nYour answer");
      reply = "Reasoning Process: invert the rule.\nPlaintext Answer: " +
              cf::cipher::decrypt(rule.key, ct);
    } else {
      const auto rule = cf::rules::parse_rule(rule_text);
      const std::string ct = between(last, "\nCiphertext input:", "\nAt the same time");
      const std::string plain = cf::cipher::decrypt(rule.key, ct);
      const std::string result = cf::render_frequency(cf::cipher::letter_frequency(plain));
      reply = "Decryption Thinking: invert.\nEnter plaintext: " + plain +
              "\nWorking on plaintext: counting\nWork result: " + result +
              "\nCrypto thinking: encrypt again\nEncrypted output: " +
              cf::cipher::encrypt(rule.key, result);
    }
  }
  return {200, completion_body(reply)};
}

}  // namespace fakes
