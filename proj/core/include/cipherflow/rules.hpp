#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cipherflow/cipher.hpp"
#include "cipherflow/error.hpp"
#include "cipherflow/rng.hpp"

namespace cipherflow::rules {

using cipher::CipherMethod;
using cipher::KeyMaterial;

inline constexpr std::string_view kMethodLabel = "Encryption Method Chosen:";
inline constexpr std::string_view kRuleLabel = "Rule:";
inline constexpr std::string_view kProcessLabel = "Process:";
inline constexpr std::string_view kKeyLabel = "Key:";
inline constexpr std::array<std::string_view, 4> kRuleLabels = {kMethodLabel, kRuleLabel,
                                                                 kProcessLabel, kKeyLabel};

// The four labelled sections of a rule description.
struct RuleText {
  std::string method_chosen;
  std::string rule;
  std::string process;
  std::string key;
  friend bool operator==(const RuleText&, const RuleText&) = default;
};

// "Encryption Method Chosen: ...\nRule: ...\nProcess: ...\nKey: ...\n"
std::string to_string(const RuleText& text);

struct CipherRule {
  KeyMaterial key;
  RuleText text;
  std::uint64_t round_id = 0;
  // How the key values were obtained (seed, engine- or model-filled).
  std::string provenance;

  CipherMethod method() const { return cipher::method_of(key); }
};

enum class RuleErrorKind { MissingSection, UnknownMethod, KeyOutOfRange, UnparseableKey };
std::string_view to_string(RuleErrorKind kind);

class RuleParseError : public Error {
 public:
  RuleParseError(RuleErrorKind kind, std::string detail);
  RuleErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }

 private:
  RuleErrorKind kind_;
  std::string detail_;
};

// Canonical text for a key: one frozen template per method.
RuleText serialize_rule(const KeyMaterial& key);
inline RuleText serialize_rule(const CipherRule& rule) { return serialize_rule(rule.key); }

// Validated rule carrying the canonical text.
CipherRule make_rule(KeyMaterial key, std::uint64_t round_id = 0, std::string provenance = {});

// Pulls the four sections out of free-form text. Throws MissingSection.
RuleText extract_rule_text(std::string_view text);

// Alias lookup over the "Encryption Method Chosen" content; the earliest alias
// in the text wins. Throws UnknownMethod.
CipherMethod identify_method(std::string_view method_chosen);

// Reads key values from a Key section. Throws UnparseableKey or KeyOutOfRange.
KeyMaterial parse_key(CipherMethod method, std::string_view key_section);

// Full parse. The resulting rule keeps the text it was parsed from.
CipherRule parse_rule(std::string_view text);

nlohmann::ordered_json to_json(const CipherRule& rule);
CipherRule rule_from_json(const nlohmann::json& j);

// --- mask protocol -------------------------------------------------------

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};
// Letter string whose length lies in [lo, hi].
struct LengthRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  friend bool operator==(const LengthRange&, const LengthRange&) = default;
};
using SlotRange = std::variant<IntRange, LengthRange>;
using SlotValue = std::variant<std::int64_t, std::string>;

struct MaskSlot {
  std::string token;
  SlotRange range;
  friend bool operator==(const MaskSlot&, const MaskSlot&) = default;
};

// "<MASK_k>", k 1-based.
std::string mask_token(std::size_t ordinal);

// A rule whose numbers are still masked plus the mask tokens it uses, before
// ranges are known.
struct MaskedRuleDraft {
  CipherMethod method = CipherMethod::Caesar;
  RuleText text;
  std::vector<std::string> tokens;  // distinct, ascending ordinal
};

struct MaskedRuleTemplate {
  CipherMethod method = CipherMethod::Caesar;
  std::vector<MaskSlot> slots;
  RuleText text;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

// Throws TemplateError unless every token in the text has exactly one slot,
// every slot token occurs in the text, and every range is non-empty.
void validate_template(const MaskedRuleTemplate& tmpl);

// Mask tokens occurring in text, in canonical form, distinct, ascending.
std::vector<std::string> mask_tokens_in(std::string_view text);

// Rewrites the mask spellings models tend to produce ("[MASK]", "{mask_2}",
// "<MASK>", bare "MASK_3") to canonical tokens. Numbered masks keep their
// ordinal; unnumbered ones take the next free ordinal in reading order.
std::string canonicalize_masks(std::string_view text);

MaskedRuleTemplate canonical_template(CipherMethod method);

// Phase-one reply -> draft. Throws RuleParseError.
MaskedRuleDraft parse_masked_rule(std::string_view text);

// Canonical phase-two answer: one "<MASK_k>: ..." line per slot.
std::string render_slot_ranges(const MaskedRuleTemplate& tmpl);

// Phase-two reply -> ranges for each draft token. Throws TemplateError when a
// slot gets no range.
MaskedRuleTemplate parse_slot_ranges(const MaskedRuleDraft& draft, std::string_view text);

// One value per slot drawn uniformly from its range. Letter strings consisting
// only of 'A' are redrawn.
std::vector<SlotValue> draw_slot_values(const MaskedRuleTemplate& tmpl, Rng& rng);

enum class SlotErrorKind { SlotCountMismatch, ValueOutOfRange };

class SlotError : public Error {
 public:
  SlotError(SlotErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  SlotErrorKind kind() const { return kind_; }

 private:
  SlotErrorKind kind_;
};

std::string to_string(const SlotValue& value);

// Replaces every occurrence of each token with its text, in all four sections.
RuleText fill_masks(const RuleText& text, std::span<const MaskSlot> slots,
                    std::span<const SlotValue> values);

// Fills the template and derives the key from the filled Key section. A
// single-slot template whose Key section is not machine-readable takes the key
// straight from the slot value. Throws SlotError or RuleParseError.
CipherRule apply_slots(const MaskedRuleTemplate& tmpl, std::span<const SlotValue> values,
                       std::string provenance = {});

}  // namespace cipherflow::rules
