#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace cipherflow {

enum class Role { User, RuleAgent, EncryptionAgent, RecipientAgent, DecryptionAgent };
enum class MessageTag { Plaintext, Ciphertext, Rule };

std::string_view to_string(Role role);
std::string_view to_string(MessageTag tag);
std::optional<Role> role_from_string(std::string_view s);
std::optional<MessageTag> tag_from_string(std::string_view s);

// A channel payload. The tag is fixed at construction.
class Message {
 public:
  Message(std::string payload, MessageTag tag, Role origin, std::uint64_t round_id)
      : payload_(std::move(payload)), tag_(tag), origin_(origin), round_id_(round_id) {}

  const std::string& payload() const { return payload_; }
  MessageTag tag() const { return tag_; }
  Role origin() const { return origin_; }
  std::uint64_t round_id() const { return round_id_; }

 private:
  std::string payload_;
  MessageTag tag_;
  Role origin_;
  std::uint64_t round_id_;
};

nlohmann::ordered_json to_json(const Message& message);

}  // namespace cipherflow
