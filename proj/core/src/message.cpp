#include "cipherflow/message.hpp"

#include <array>

namespace cipherflow {
namespace {

constexpr std::array<std::string_view, 5> kRoleNames = {"user", "rule_agent", "encryption_agent",
                                                        "recipient_agent", "decryption_agent"};
constexpr std::array<std::string_view, 3> kTagNames = {"plaintext", "ciphertext", "rule"};

}  // namespace

std::string_view to_string(Role role) { return kRoleNames[static_cast<std::size_t>(role)]; }
std::string_view to_string(MessageTag tag) { return kTagNames[static_cast<std::size_t>(tag)]; }

std::optional<Role> role_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
    if (kRoleNames[i] == s) return static_cast<Role>(i);
  }
  return std::nullopt;
}

std::optional<MessageTag> tag_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kTagNames.size(); ++i) {
    if (kTagNames[i] == s) return static_cast<MessageTag>(i);
  }
  return std::nullopt;
}

nlohmann::ordered_json to_json(const Message& message) {
  nlohmann::ordered_json j;
  j["round_id"] = message.round_id();
  j["tag"] = std::string(to_string(message.tag()));
  j["origin"] = std::string(to_string(message.origin()));
  j["payload"] = message.payload();
  return j;
}

}  // namespace cipherflow
