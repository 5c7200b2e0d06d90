#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cipherflow/backend.hpp"
#include "cipherflow/llm/prompts.hpp"
#include "cipherflow/llm/transport.hpp"

namespace cipherflow::llm {

struct LlmConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o";
  double rule_temperature = 1.0;
  double exec_temperature = 0.0;
  int max_retries = 2;
  double timeout_seconds = 60.0;
  // Base delay before the first retry; doubles on each further retry.
  std::chrono::milliseconds retry_backoff{500};
  std::string api_key_env = "OPENAI_API_KEY";
  // Take key values from the model's phase-3 reply instead of the engine draw.
  bool llm_fills_numbers = false;
  // Replay responses from this fixture file instead of calling the endpoint.
  std::optional<std::filesystem::path> fixture;
};

// Throws std::invalid_argument for timeout <= 0 or retries < 0.
void validate(const LlmConfig& config);
LlmConfig config_from_json(const nlohmann::json& j);
LlmConfig load_config(const std::filesystem::path& file);

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
};

enum class LlmErrorKind { Timeout, Transport, Api };

class LlmError : public BackendFailure {
 public:
  LlmError(LlmErrorKind kind, int status, const std::string& what)
      : BackendFailure(what), kind_(kind), status_(status) {}
  LlmErrorKind kind() const { return kind_; }
  // HTTP status for Api errors, 0 otherwise.
  int status() const { return status_; }

 private:
  LlmErrorKind kind_;
  int status_;
};

// Request body for a chat-completions call.
std::string chat_request_body(const LlmConfig& config, const std::vector<ChatMessage>& messages,
                              double temperature);

// One completion. Retries transport failures, 429 and 5xx up to
// config.max_retries times; other statuses fail at once. Throws LlmError.
std::string chat(const LlmConfig& config, Transport& transport,
                 const std::vector<ChatMessage>& messages, double temperature);

// Backend that drives a chat-completions endpoint with the prompt templates.
class LlmBackend : public Backend {
 public:
  LlmBackend(LlmConfig config, Transport& transport);

  std::string_view name() const override { return "llm"; }
  bool fills_numbers() const override { return config_.llm_fills_numbers; }

  BackendReply generate_rule_phase(const RulePhaseContext& context) override;
  BackendReply transform(TransformRole role, const rules::CipherRule& rule,
                         std::string_view input) override;
  BackendReply recipient_task(const rules::CipherRule& rule, std::string_view ciphertext,
                              const TaskSpec& task) override;

  // Full message list for a rule phase; exposed so tests can inspect context.
  std::vector<ChatMessage> rule_phase_messages(const RulePhaseContext& context) const;

  const LlmConfig& config() const { return config_; }

 private:
  LlmConfig config_;
  Transport& transport_;
};

}  // namespace cipherflow::llm
