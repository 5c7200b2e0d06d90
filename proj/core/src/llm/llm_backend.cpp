#include "cipherflow/llm/llm_backend.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

namespace cipherflow::llm {
namespace {

bool retryable_status(int status) { return status == 429 || status >= 500; }

std::string extract_content(const std::string& body) {
  const auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw LlmError(LlmErrorKind::Api, 200, "response body is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw LlmError(LlmErrorKind::Api, 200, "response has no choices[0].message.content");
  }
}

}  // namespace

void validate(const LlmConfig& config) {
  if (!(config.timeout_seconds > 0)) throw std::invalid_argument("timeout must be positive");
  if (config.max_retries < 0) throw std::invalid_argument("max retries must be non-negative");
  if (config.retry_backoff.count() < 0) throw std::invalid_argument("backoff must be non-negative");
  if (config.endpoint.empty()) throw std::invalid_argument("endpoint must not be empty");
}

LlmConfig config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "endpoint",        "model",       "rule_temperature", "exec_temperature",
      "max_retries",     "timeout_seconds", "retry_backoff_ms", "api_key_env",
      "llm_fills_numbers", "fixture"};
  if (!j.is_object()) throw std::invalid_argument("LLM config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown LLM config key: " + key);
  }
  LlmConfig c;
  try {
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    c.rule_temperature = j.value("rule_temperature", c.rule_temperature);
    c.exec_temperature = j.value("exec_temperature", c.exec_temperature);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
    c.retry_backoff = std::chrono::milliseconds(
        j.value("retry_backoff_ms", static_cast<std::int64_t>(c.retry_backoff.count())));
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.llm_fills_numbers = j.value("llm_fills_numbers", c.llm_fills_numbers);
    if (j.contains("fixture") && !j["fixture"].is_null()) {
      c.fixture = j["fixture"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad LLM config value: ") + e.what());
  }
  validate(c);
  return c;
}

LlmConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open LLM config " + file.string());
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("LLM config " + file.string() + " is not JSON");
  LlmConfig c = config_from_json(j);
  // A relative fixture path is taken relative to the config file.
  if (c.fixture && c.fixture->is_relative()) c.fixture = file.parent_path() / *c.fixture;
  return c;
}

std::string chat_request_body(const LlmConfig& config, const std::vector<ChatMessage>& messages,
                              double temperature) {
  nlohmann::ordered_json j;
  j["model"] = config.model;
  j["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : messages) j["messages"].push_back({{"role", m.role}, {"content", m.content}});
  j["temperature"] = temperature;
  return j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

std::string chat(const LlmConfig& config, Transport& transport,
                 const std::vector<ChatMessage>& messages, double temperature) {
  validate(config);
  HttpRequest req;
  req.url = config.endpoint;
  req.body = chat_request_body(config, messages, temperature);
  req.timeout = std::chrono::milliseconds(static_cast<std::int64_t>(config.timeout_seconds * 1000));
  if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) {
    req.headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }

  std::optional<LlmError> last;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0 && config.retry_backoff.count() > 0) {
      std::this_thread::sleep_for(config.retry_backoff * (1LL << std::min(attempt - 1, 16)));
    }
    HttpResponse resp;
    try {
      resp = transport.post(req);
    } catch (const TimeoutError& e) {
      last.emplace(LlmErrorKind::Timeout, 0, std::string("Timeout: ") + e.what());
      continue;
    } catch (const TransportError& e) {
      last.emplace(LlmErrorKind::Transport, 0, std::string("TransportError: ") + e.what());
      continue;
    }
    if (resp.status >= 200 && resp.status < 300) return extract_content(resp.body);
    LlmError err(LlmErrorKind::Api, resp.status,
                 "ApiError(" + std::to_string(resp.status) + "): " + resp.body.substr(0, 200));
    if (!retryable_status(resp.status)) throw err;
    last = std::move(err);
  }
  throw *last;
}

LlmBackend::LlmBackend(LlmConfig config, Transport& transport)
    : config_(std::move(config)), transport_(transport) {
  validate(config_);
}

std::vector<ChatMessage> LlmBackend::rule_phase_messages(const RulePhaseContext& ctx) const {
  if (ctx.phase < 1 || ctx.phase > 3) {
    throw BackendFailure("unknown rule phase " + std::to_string(ctx.phase));
  }
  if (ctx.prior_replies.size() < static_cast<std::size_t>(ctx.phase - 1)) {
    throw BackendFailure("rule phase " + std::to_string(ctx.phase) + " without earlier replies");
  }
  static constexpr TemplateId kPhases[] = {TemplateId::RulePhase1, TemplateId::RulePhase2,
                                           TemplateId::RulePhase3};
  std::vector<ChatMessage> messages;
  for (int p = 1; p <= ctx.phase; ++p) {
    std::string prompt = render_prompt(kPhases[p - 1], {});
    if (p == 3 && !config_.llm_fills_numbers) {
      if (const std::string line = engine_values_instruction(ctx); !line.empty()) {
        prompt += "\n" + line;
      }
    }
    messages.push_back({"user", std::move(prompt)});
    if (p < ctx.phase) messages.push_back({"assistant", ctx.prior_replies[p - 1]});
  }
  return messages;
}

BackendReply LlmBackend::generate_rule_phase(const RulePhaseContext& context) {
  const std::string reply =
      chat(config_, transport_, rule_phase_messages(context), config_.rule_temperature);
  return {reply, reply};
}

BackendReply LlmBackend::transform(TransformRole role, const rules::CipherRule& rule,
                                   std::string_view input) {
  const bool enc = role == TransformRole::Encrypt;
  const std::string prompt =
      render_prompt(enc ? TemplateId::Encrypt : TemplateId::Decrypt,
                    {{"rules", rules::to_string(rule.text)},
                     {enc ? "plaintext" : "ciphertext", std::string(input)}});
  const std::string reply = chat(config_, transport_, {{"user", prompt}}, config_.exec_temperature);
  try {
    return {extract_section(reply, enc ? kCiphertextAnswer : kPlaintextAnswer), reply};
  } catch (const LabelNotFound& e) {
    throw BackendFailure(e.what());
  }
}

BackendReply LlmBackend::recipient_task(const rules::CipherRule& rule, std::string_view ciphertext,
                                        const TaskSpec& task) {
  const std::string prompt = render_prompt(TemplateId::Recipient,
                                           {{"rules", rules::to_string(rule.text)},
                                            {"ciphertext", std::string(ciphertext)},
                                            {"role", task.role_phrase},
                                            {"task", task.task_phrase},
                                            {"task_name", task.task_name}});
  const std::string reply = chat(config_, transport_, {{"user", prompt}}, config_.exec_temperature);
  try {
    return {extract_section(reply, kEncryptedOutput), reply};
  } catch (const LabelNotFound& e) {
    throw BackendFailure(e.what());
  }
}

}  // namespace cipherflow::llm
