#include "cipherflow/rules.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "cipherflow/sections.hpp"

namespace cipherflow::rules {
namespace {

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }
char upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string lower_copy(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = lower(c);
  return out;
}

// Dashes and curly quotes become ASCII; any other non-ASCII byte becomes a
// space. Key values are ASCII by definition.
std::string asciify(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto b = static_cast<unsigned char>(s[i]);
    if (b < 0x80) {
      out.push_back(s[i]);
      continue;
    }
    // U+2010..U+2015 dashes, U+2018..U+201D quotes: E2 80 90..9D.
    if (b == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80) {
      const auto c = static_cast<unsigned char>(s[i + 2]);
      if (c >= 0x90 && c <= 0x95) {
        out.push_back('-');
        i += 2;
        continue;
      }
      if (c >= 0x98 && c <= 0x9D) {
        out.push_back('"');
        i += 2;
        continue;
      }
    }
    out.push_back(' ');
  }
  return out;
}

enum class TokKind { Word, Number, Mixed, Mask, Punct };

struct Token {
  TokKind kind;
  std::string text;   // original spelling
  std::string lower;  // lowercase spelling
  std::size_t begin;
  std::size_t end;
  std::int64_t number = 0;
  bool number_word = false;  // "three" and friends: a Word that also reads as a number

  bool numeric() const { return kind == TokKind::Number || number_word; }
  bool all_caps() const {
    return kind == TokKind::Word && text.size() >= 3 &&
           std::none_of(text.begin(), text.end(), [](char c) { return c >= 'a' && c <= 'z'; });
  }
};

const std::map<std::string, std::int64_t>& number_words() {
  static const std::map<std::string, std::int64_t> words = {
      {"one", 1},       {"two", 2},        {"three", 3},     {"four", 4},
      {"five", 5},      {"six", 6},        {"seven", 7},     {"eight", 8},
      {"nine", 9},      {"ten", 10},       {"eleven", 11},   {"twelve", 12},
      {"thirteen", 13}, {"fourteen", 14},  {"fifteen", 15},  {"sixteen", 16},
      {"seventeen", 17}, {"eighteen", 18}, {"nineteen", 19}, {"twenty", 20}};
  return words;
}

// Splits ASCII text into alphanumeric runs, canonical mask tokens and single
// punctuation characters. Whitespace separates tokens and is dropped.
std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '<' && s.substr(i, 6) == "<MASK_") {
      std::size_t j = i + 6;
      while (j < s.size() && is_digit(s[j])) ++j;
      if (j > i + 6 && j < s.size() && s[j] == '>') {
        std::string t(s.substr(i, j + 1 - i));
        out.push_back({TokKind::Mask, t, t, i, j + 1});
        i = j + 1;
        continue;
      }
    }
    if (std::isalnum(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      bool letters = false;
      bool digits = false;
      while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) {
        (is_digit(s[j]) ? digits : letters) = true;
        ++j;
      }
      Token t{TokKind::Mixed, std::string(s.substr(i, j - i)), lower_copy(s.substr(i, j - i)), i, j};
      if (digits && !letters) {
        t.kind = TokKind::Number;
        // Long digit runs saturate; any such value is out of range anyway.
        t.number = t.text.size() > 12 ? 999999999999 : std::stoll(t.text);
      } else if (letters && !digits) {
        t.kind = TokKind::Word;
        if (auto it = number_words().find(t.lower); it != number_words().end()) {
          t.number_word = true;
          t.number = it->second;
        }
      }
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    std::string t(1, c);
    out.push_back({TokKind::Punct, t, t, i, i + 1});
    ++i;
  }
  return out;
}

bool in(const std::string& word, std::initializer_list<std::string_view> set) {
  return std::find(set.begin(), set.end(), word) != set.end();
}

// Words and punctuation allowed between an alias and its value. An all-caps
// word of three or more letters is always a value (keywords are written that
// way), never filler.
bool is_filler(const Token& t) {
  if (t.kind == TokKind::Punct) return in(t.text, {":", "=", "-", "\"", "'", "`", "*", "(", ","});
  if (t.kind != TokKind::Word || t.all_caps()) return false;
  return in(t.lower, {"is", "of", "by", "the", "a", "an", "value", "amount", "set", "to",
                      "equals", "equal", "will", "be", "used", "chosen", "selected", "as",
                      "word", "phrase", "count", "number", "size", "total", "use", "uses",
                      "using", "with", "we", "e", "g", "i", "for", "this", "cipher"});
}

bool number_is_negative(const std::vector<Token>& toks, std::size_t idx) {
  return idx > 0 && toks[idx - 1].text == "-" && toks[idx - 1].end == toks[idx].begin &&
         (idx == 1 || toks[idx - 2].end < toks[idx - 1].begin || toks[idx - 2].text == ":");
}

std::optional<std::size_t> first_after_fillers(const std::vector<Token>& toks, std::size_t from,
                                               std::size_t max_skip = 6) {
  std::size_t skipped = 0;
  for (std::size_t i = from; i < toks.size(); ++i) {
    if (toks[i].kind == TokKind::Punct && !is_filler(toks[i])) return std::nullopt;
    if (!is_filler(toks[i])) return i;
    if (++skipped > max_skip) return std::nullopt;
  }
  return std::nullopt;
}

std::int64_t checked_number(const std::vector<Token>& toks, std::size_t idx) {
  return number_is_negative(toks, idx) ? -toks[idx].number : toks[idx].number;
}

// Integer key: alias followed by a number, then "<n> positions", then a
// unique number anywhere in the section.
std::int64_t parse_int_key(const std::vector<Token>& toks,
                           std::initializer_list<std::string_view> aliases,
                           std::initializer_list<std::string_view> units, std::string_view what) {
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokKind::Word || !in(toks[i].lower, aliases)) continue;
    auto v = first_after_fillers(toks, i + 1);
    if (v && toks[*v].numeric()) return checked_number(toks, *v);
  }
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    if (toks[i].numeric() && toks[i + 1].kind == TokKind::Word &&
        in(toks[i + 1].lower, units)) {
      return checked_number(toks, i);
    }
  }
  std::set<std::int64_t> distinct;
  std::optional<std::size_t> only;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind == TokKind::Number) {
      distinct.insert(checked_number(toks, i));
      only = i;
    }
  }
  if (distinct.size() == 1) return checked_number(toks, *only);
  if (distinct.empty()) {
    throw RuleParseError(RuleErrorKind::UnparseableKey, std::string("no ") + std::string(what) + " value in Key section");
  }
  throw RuleParseError(RuleErrorKind::UnparseableKey,
                       std::string("ambiguous ") + std::string(what) + ": several numbers in Key section");
}

std::string upper_copy(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = upper(c);
  return out;
}

std::string take_keyword(const Token& t) {
  if (t.kind == TokKind::Word) return upper_copy(t.text);
  throw RuleParseError(RuleErrorKind::KeyOutOfRange,
                       "keyword '" + t.text + "' must contain only letters A-Z");
}

std::string parse_keyword(const std::vector<Token>& toks) {
  const std::initializer_list<std::string_view> kAliases = {
      "keyword", "key", "passphrase", "password", "secret", "codeword"};
  // A single word written in capitals is the keyword however it is introduced.
  std::set<std::string> caps;
  for (const auto& t : toks) {
    if (t.all_caps() && !in(t.lower, kAliases)) caps.insert(t.text);
  }
  if (caps.size() == 1) return *caps.begin();
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (toks[i].kind != TokKind::Word || !in(toks[i].lower, kAliases)) continue;
    auto v = first_after_fillers(toks, i + 1);
    if (!v) continue;
    if (toks[*v].kind == TokKind::Word && in(toks[*v].lower, kAliases) && !toks[*v].all_caps()) continue;
    if (toks[*v].kind == TokKind::Mask) continue;
    return take_keyword(toks[*v]);
  }
  std::vector<const Token*> content;
  for (const auto& t : toks) {
    if (t.kind != TokKind::Punct) content.push_back(&t);
  }
  if (content.size() == 1) return take_keyword(*content.front());
  throw RuleParseError(RuleErrorKind::UnparseableKey, "no keyword found in Key section");
}

struct MethodAlias {
  std::string_view alias;
  CipherMethod method;
};

constexpr MethodAlias kMethodAliases[] = {
    {"caesar", CipherMethod::Caesar},        {"caeser", CipherMethod::Caesar},
    {"cesar", CipherMethod::Caesar},         {"shift cipher", CipherMethod::Caesar},
    {"vigen", CipherMethod::Vigenere},       {"vegenere", CipherMethod::Vigenere},
    {"atbash", CipherMethod::Atbash},        {"at-bash", CipherMethod::Atbash},
    {"at bash", CipherMethod::Atbash},       {"mirror alphabet", CipherMethod::Atbash},
    {"playfair", CipherMethod::Playfair},    {"play fair", CipherMethod::Playfair},
    {"play-fair", CipherMethod::Playfair},   {"rail fence", CipherMethod::RailFence},
    {"railfence", CipherMethod::RailFence},  {"rail-fence", CipherMethod::RailFence},
    {"zigzag", CipherMethod::RailFence},     {"zig-zag", CipherMethod::RailFence},
};

// Canonical descriptions. Each template holds the key value only in the Key
// section, as a single <MASK_1> (Atbash has none).
struct CanonicalText {
  std::string_view method;
  std::string_view rule;
  std::string_view process;
  std::string_view key;
};

constexpr CanonicalText kCanonical[] = {
    {"Caesar Cipher",
     "Replace each letter with the letter a fixed number of positions later in the alphabet, "
     "wrapping from Z back to A. The number of positions is the shift given in Key.",
     "Convert the plaintext to uppercase. Move each letter forward by the shift, wrapping "
     "around after Z. Leave spaces, digits and punctuation unchanged.",
     "shift: <MASK_1>"},
    {"Vigen\xC3\xA8re Cipher",
     "Shift each letter forward by the alphabet position (A as zero) of the matching keyword "
     "letter, repeating the keyword across the letters of the message.",
     "Convert the plaintext to uppercase. Pair each letter with the next keyword letter, "
     "advancing through the keyword only on letters. Shift the letter forward by that keyword "
     "letter's position. Leave spaces, digits and punctuation unchanged.",
     "keyword: <MASK_1>"},
    {"Atbash Cipher",
     "Replace each letter with its mirror in the reversed alphabet, so A and Z swap, B and Y "
     "swap, and so on.",
     "Convert the plaintext to uppercase. Replace each letter with its mirror letter. Leave "
     "spaces, digits and punctuation unchanged.",
     "none (fixed reflection)"},
    {"Playfair Cipher",
     "Build a five-by-five letter grid from the keyword followed by the rest of the alphabet, "
     "with I and J sharing a cell, then encrypt the letters in pairs using the grid.",
     "Convert the plaintext to uppercase and replace J with I. Split the letters into pairs, "
     "putting X between a doubled letter (Q when the doubled letter is X) and padding a lone "
     "final letter the same way. For a pair in one row take the letters to their right, for a "
     "pair in one column take the letters below, otherwise take the letters in the same rows "
     "at the other letter's column. Leave spaces, digits and punctuation in place.",
     "keyword: <MASK_1>"},
    {"Rail Fence Cipher",
     "Write the message in a zigzag across the number of rails given in Key, then read the "
     "rails off from top to bottom.",
     "Convert the plaintext to uppercase. Write every character, spaces included, diagonally "
     "down and up across the rails. Concatenate the rails from top to bottom.",
     "rails: <MASK_1>"},
};

const CanonicalText& canonical(CipherMethod m) { return kCanonical[static_cast<int>(m)]; }

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::size_t token_ordinal(std::string_view token) {
  return static_cast<std::size_t>(std::stoull(std::string(token.substr(6, token.size() - 7))));
}

// Builds the key directly from a single slot value.
KeyMaterial key_from_value(CipherMethod method, const SlotValue& value) {
  const auto* number = std::get_if<std::int64_t>(&value);
  const auto* text = std::get_if<std::string>(&value);
  const auto as_int = [](std::int64_t v) {
    return static_cast<int>(std::clamp<std::int64_t>(v, -1000000, 1000000));
  };
  switch (method) {
    case CipherMethod::Caesar:
      if (number) return cipher::CaesarKey{as_int(*number)};
      break;
    case CipherMethod::RailFence:
      if (number) return cipher::RailFenceKey{as_int(*number)};
      break;
    case CipherMethod::Vigenere:
      if (text) return cipher::VigenereKey{upper_copy(*text)};
      break;
    case CipherMethod::Playfair:
      if (text) return cipher::PlayfairKey{upper_copy(*text)};
      break;
    case CipherMethod::Atbash:
      return cipher::AtbashKey{};
  }
  throw RuleParseError(RuleErrorKind::UnparseableKey, "slot value has the wrong type for the method");
}

void validate_or_throw(const KeyMaterial& key) {
  try {
    cipher::validate_key(key);
  } catch (const cipher::InvalidKey& e) {
    throw RuleParseError(RuleErrorKind::KeyOutOfRange, e.what());
  }
}

}  // namespace

std::string to_string(const RuleText& text) {
  std::string out;
  out.append(kMethodLabel).append(" ").append(text.method_chosen).append("\n");
  out.append(kRuleLabel).append(" ").append(text.rule).append("\n");
  out.append(kProcessLabel).append(" ").append(text.process).append("\n");
  out.append(kKeyLabel).append(" ").append(text.key).append("\n");
  return out;
}

std::string_view to_string(RuleErrorKind kind) {
  switch (kind) {
    case RuleErrorKind::MissingSection: return "MissingSection";
    case RuleErrorKind::UnknownMethod: return "UnknownMethod";
    case RuleErrorKind::KeyOutOfRange: return "KeyOutOfRange";
    case RuleErrorKind::UnparseableKey: return "UnparseableKey";
  }
  return "";
}

RuleParseError::RuleParseError(RuleErrorKind kind, std::string detail)
    : Error(std::string(to_string(kind)) + "(" + detail + ")"),
      kind_(kind),
      detail_(std::move(detail)) {}

RuleText serialize_rule(const KeyMaterial& key) {
  const MaskedRuleTemplate tmpl = canonical_template(cipher::method_of(key));
  std::vector<SlotValue> values;
  std::visit(
      [&values](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, cipher::CaesarKey>) values.emplace_back(std::int64_t{k.shift});
        else if constexpr (std::is_same_v<K, cipher::RailFenceKey>) values.emplace_back(std::int64_t{k.rails});
        else if constexpr (std::is_same_v<K, cipher::VigenereKey> || std::is_same_v<K, cipher::PlayfairKey>)
          values.emplace_back(upper_copy(k.keyword));
      },
      key);
  return fill_masks(tmpl.text, tmpl.slots, values);
}

CipherRule make_rule(KeyMaterial key, std::uint64_t round_id, std::string provenance) {
  cipher::validate_key(key);
  CipherRule rule{std::move(key), {}, round_id, std::move(provenance)};
  rule.text = serialize_rule(rule.key);
  return rule;
}

RuleText extract_rule_text(std::string_view text) {
  RuleText out;
  const std::pair<std::string_view, std::string*> fields[] = {
      {kMethodLabel, &out.method_chosen},
      {kRuleLabel, &out.rule},
      {kProcessLabel, &out.process},
      {kKeyLabel, &out.key}};
  for (const auto& [label, field] : fields) {
    auto content = section_content(text, label, kRuleLabels);
    if (!content) {
      throw RuleParseError(RuleErrorKind::MissingSection,
                           std::string(label.substr(0, label.size() - 1)));
    }
    *field = std::move(*content);
  }
  return out;
}

CipherMethod identify_method(std::string_view method_chosen) {
  const std::string text = lower_copy(method_chosen);
  std::optional<CipherMethod> best;
  std::size_t best_pos = std::string::npos;
  for (const auto& [alias, method] : kMethodAliases) {
    const std::size_t pos = text.find(alias);
    if (pos < best_pos) {
      best_pos = pos;
      best = method;
    }
  }
  if (!best) throw RuleParseError(RuleErrorKind::UnknownMethod, trim(method_chosen));
  return *best;
}

KeyMaterial parse_key(CipherMethod method, std::string_view key_section) {
  const auto toks = tokenize(asciify(key_section));
  KeyMaterial key;
  switch (method) {
    case CipherMethod::Caesar: {
      const auto shift = parse_int_key(
          toks, {"shift", "shifts", "displacement", "offset", "key", "rotation", "rot", "move"},
          {"position", "positions", "place", "places", "letter", "letters", "step", "steps"},
          "shift");
      key = cipher::CaesarKey{static_cast<int>(std::clamp<std::int64_t>(shift, -1000000, 1000000))};
      break;
    }
    case CipherMethod::RailFence: {
      const auto rails = parse_int_key(
          toks, {"rails", "rail", "depth", "lines", "rows", "levels", "key", "height"},
          {"rails", "rail", "lines", "rows", "levels"}, "rail count");
      key = cipher::RailFenceKey{static_cast<int>(std::clamp<std::int64_t>(rails, -1000000, 1000000))};
      break;
    }
    case CipherMethod::Vigenere:
      key = cipher::VigenereKey{parse_keyword(toks)};
      break;
    case CipherMethod::Playfair:
      key = cipher::PlayfairKey{parse_keyword(toks)};
      break;
    case CipherMethod::Atbash:
      key = cipher::AtbashKey{};
      break;
  }
  validate_or_throw(key);
  return key;
}

CipherRule parse_rule(std::string_view text) {
  RuleText sections = extract_rule_text(text);
  const CipherMethod method = identify_method(sections.method_chosen);
  KeyMaterial key = parse_key(method, sections.key);
  return CipherRule{std::move(key), std::move(sections), 0, {}};
}

nlohmann::ordered_json to_json(const CipherRule& rule) {
  nlohmann::ordered_json j;
  j["method"] = std::string(cipher::method_id(rule.method()));
  nlohmann::ordered_json key = nlohmann::ordered_json::object();
  std::visit(
      [&key](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, cipher::CaesarKey>) key["shift"] = k.shift;
        else if constexpr (std::is_same_v<K, cipher::VigenereKey>) key["keyword"] = k.keyword;
        else if constexpr (std::is_same_v<K, cipher::PlayfairKey>) key["keyword"] = k.keyword;
        else if constexpr (std::is_same_v<K, cipher::RailFenceKey>) key["rails"] = k.rails;
      },
      rule.key);
  j["key"] = std::move(key);
  j["round_id"] = rule.round_id;
  j["rule_text"] = to_string(rule.text);
  if (!rule.provenance.empty()) j["provenance"] = rule.provenance;
  return j;
}

CipherRule rule_from_json(const nlohmann::json& j) {
  const auto method = cipher::method_from_id(j.at("method").get<std::string>());
  if (!method) throw RuleParseError(RuleErrorKind::UnknownMethod, j.at("method").get<std::string>());
  const auto& k = j.at("key");
  KeyMaterial key;
  switch (*method) {
    case CipherMethod::Caesar: key = cipher::CaesarKey{k.at("shift").get<int>()}; break;
    case CipherMethod::Vigenere: key = cipher::VigenereKey{k.at("keyword").get<std::string>()}; break;
    case CipherMethod::Atbash: key = cipher::AtbashKey{}; break;
    case CipherMethod::Playfair: key = cipher::PlayfairKey{k.at("keyword").get<std::string>()}; break;
    case CipherMethod::RailFence: key = cipher::RailFenceKey{k.at("rails").get<int>()}; break;
  }
  validate_or_throw(key);
  CipherRule rule{std::move(key), {}, j.value("round_id", std::uint64_t{0}), j.value("provenance", std::string{})};
  if (j.contains("rule_text")) {
    rule.text = extract_rule_text(j.at("rule_text").get<std::string>());
  } else {
    rule.text = serialize_rule(rule.key);
  }
  return rule;
}

// --- mask protocol -------------------------------------------------------

std::string mask_token(std::size_t ordinal) { return "<MASK_" + std::to_string(ordinal) + ">"; }

std::vector<std::string> mask_tokens_in(std::string_view text) {
  std::set<std::size_t> ordinals;
  for (const auto& t : tokenize(text)) {
    if (t.kind == TokKind::Mask) ordinals.insert(token_ordinal(t.text));
  }
  std::vector<std::string> out;
  for (auto k : ordinals) out.push_back(mask_token(k));
  return out;
}

std::string canonicalize_masks(std::string_view text) {
  struct Hit {
    std::size_t begin;
    std::size_t end;
    std::optional<std::size_t> ordinal;
  };
  std::vector<Hit> hits;
  const auto match_mask_word = [&](std::size_t p, bool upper_only) -> std::optional<std::size_t> {
    if (text.size() - p < 4) return std::nullopt;
    for (std::size_t i = 0; i < 4; ++i) {
      const char c = text[p + i];
      if (upper_only ? c != "MASK"[i] : lower(c) != "mask"[i]) return std::nullopt;
    }
    return p + 4;
  };
  const auto read_ordinal = [&](std::size_t& p) -> std::optional<std::size_t> {
    std::size_t q = p;
    while (q < text.size() && (text[q] == '_' || text[q] == ' ' || text[q] == '-')) ++q;
    std::size_t d = q;
    while (d < text.size() && is_digit(text[d]) && d - q < 6) ++d;
    if (d == q) return std::nullopt;
    p = d;
    return static_cast<std::size_t>(std::stoull(std::string(text.substr(q, d - q))));
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    const char closer = c == '<' ? '>' : c == '[' ? ']' : c == '{' ? '}' : '\0';
    if (closer) {
      std::size_t p = i + 1;
      while (p < text.size() && text[p] == ' ') ++p;
      if (auto after = match_mask_word(p, false)) {
        p = *after;
        auto ordinal = read_ordinal(p);
        while (p < text.size() && text[p] == ' ') ++p;
        if (p < text.size() && text[p] == closer) {
          hits.push_back({i, p + 1, ordinal});
          i = p + 1;
          continue;
        }
      }
    } else if (c == 'M' && (i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1])))) {
      if (auto after = match_mask_word(i, true)) {
        std::size_t p = *after;
        std::optional<std::size_t> ordinal;
        if (p < text.size() && text[p] == '_') ordinal = read_ordinal(p);
        if (p >= text.size() || !std::isalnum(static_cast<unsigned char>(text[p]))) {
          hits.push_back({i, p, ordinal});
          i = p;
          continue;
        }
      }
    }
    ++i;
  }
  // Unnumbered masks all stand for the same value and share the smallest
  // ordinal not written explicitly.
  std::set<std::size_t> used;
  for (const auto& h : hits) {
    if (h.ordinal) used.insert(*h.ordinal);
  }
  std::size_t shared = 1;
  while (used.contains(shared)) ++shared;
  std::string out;
  std::size_t pos = 0;
  for (const auto& h : hits) {
    out.append(text.substr(pos, h.begin - pos));
    out.append(mask_token(h.ordinal ? *h.ordinal : shared));
    pos = h.end;
  }
  out.append(text.substr(pos));
  return out;
}

void validate_template(const MaskedRuleTemplate& tmpl) {
  std::set<std::string> slot_tokens;
  for (const auto& slot : tmpl.slots) {
    if (!slot_tokens.insert(slot.token).second) {
      throw TemplateError("mask token " + slot.token + " has more than one slot");
    }
    const bool empty = std::visit([](const auto& r) { return r.hi < r.lo; }, slot.range);
    if (empty) throw TemplateError("slot " + slot.token + " has an empty range");
  }
  const auto in_text = mask_tokens_in(to_string(tmpl.text));
  const std::set<std::string> text_tokens(in_text.begin(), in_text.end());
  if (text_tokens != slot_tokens) {
    throw TemplateError("mask tokens in the rule text do not match the slot list");
  }
}

MaskedRuleTemplate canonical_template(CipherMethod method) {
  const auto& c = canonical(method);
  MaskedRuleTemplate tmpl{method, {},
                          RuleText{std::string(c.method), std::string(c.rule),
                                   std::string(c.process), std::string(c.key)}};
  switch (method) {
    case CipherMethod::Caesar:
      tmpl.slots.push_back({mask_token(1), IntRange{cipher::kMinShift, cipher::kMaxShift}});
      break;
    case CipherMethod::RailFence:
      tmpl.slots.push_back({mask_token(1), IntRange{cipher::kMinRails, cipher::kMaxRails}});
      break;
    case CipherMethod::Vigenere:
    case CipherMethod::Playfair:
      tmpl.slots.push_back(
          {mask_token(1), LengthRange{cipher::kMinKeywordLength, cipher::kMaxKeywordLength}});
      break;
    case CipherMethod::Atbash:
      break;
  }
  return tmpl;
}

MaskedRuleDraft parse_masked_rule(std::string_view text) {
  const std::string canonical_text = canonicalize_masks(text);
  RuleText sections = extract_rule_text(canonical_text);
  const CipherMethod method = identify_method(sections.method_chosen);
  auto tokens = mask_tokens_in(to_string(sections));
  return MaskedRuleDraft{method, std::move(sections), std::move(tokens)};
}

std::string render_slot_ranges(const MaskedRuleTemplate& tmpl) {
  if (tmpl.slots.empty()) return "This rule has no masked numbers.";
  std::string out;
  for (const auto& slot : tmpl.slots) {
    out += slot.token + ": ";
    if (const auto* r = std::get_if<IntRange>(&slot.range)) {
      out += "an integer from " + std::to_string(r->lo) + " to " + std::to_string(r->hi);
    } else {
      const auto& l = std::get<LengthRange>(slot.range);
      out += "a keyword of " + std::to_string(l.lo) + " to " + std::to_string(l.hi) +
             " letters (A-Z)";
    }
    out += "\n";
  }
  return out;
}

MaskedRuleTemplate parse_slot_ranges(const MaskedRuleDraft& draft, std::string_view text) {
  MaskedRuleTemplate tmpl{draft.method, {}, draft.text};
  const auto toks = tokenize(asciify(canonicalize_masks(text)));

  // Each "<lo> <sep> <hi>" occurrence with the token index it starts at.
  struct Found {
    std::size_t at;
    std::int64_t lo;
    std::int64_t hi;
  };
  std::vector<Found> ranges;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!toks[i].numeric()) continue;
    std::size_t j = i + 1;
    std::size_t seps = 0;
    while (j < toks.size() && seps < 2 &&
           (in(toks[j].lower, {"to", "through", "thru", "and", "up", "-", ".", ",", "~"}))) {
      ++j;
      ++seps;
    }
    if (seps > 0 && j < toks.size() && toks[j].numeric()) {
      ranges.push_back({i, std::min(toks[i].number, toks[j].number),
                        std::max(toks[i].number, toks[j].number)});
      i = j;
    }
  }

  const bool keyword_method =
      draft.method == CipherMethod::Vigenere || draft.method == CipherMethod::Playfair;
  const auto mentions_length = [&](std::size_t from, std::size_t to) {
    for (std::size_t i = from; i < to && i < toks.size(); ++i) {
      if (in(toks[i].lower, {"letter", "letters", "length", "characters", "character", "keyword",
                             "long", "word", "chars"})) {
        return true;
      }
    }
    return false;
  };

  std::size_t fallback = 0;
  for (const auto& token : draft.tokens) {
    std::optional<Found> chosen;
    std::size_t segment_begin = 0;
    std::size_t segment_end = toks.size();
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i].kind != TokKind::Mask || toks[i].text != token) continue;
      std::size_t end = i + 1;
      while (end < toks.size() && !(toks[end].kind == TokKind::Mask && toks[end].text != token)) ++end;
      for (const auto& r : ranges) {
        if (r.at > i && r.at < end) {
          chosen = r;
          segment_begin = i;
          segment_end = end;
          break;
        }
      }
      if (chosen) break;
    }
    if (!chosen && fallback < ranges.size()) {
      chosen = ranges[fallback++];
      segment_begin = chosen->at > 6 ? chosen->at - 6 : 0;
      segment_end = std::min(toks.size(), chosen->at + 8);
    }
    if (!chosen) throw TemplateError("no range given for " + token);
    const bool length_slot =
        keyword_method && (draft.tokens.size() == 1 || mentions_length(segment_begin, segment_end));
    if (length_slot) {
      tmpl.slots.push_back({token, LengthRange{static_cast<std::size_t>(std::max<std::int64_t>(0, chosen->lo)),
                                               static_cast<std::size_t>(std::max<std::int64_t>(0, chosen->hi))}});
    } else {
      tmpl.slots.push_back({token, IntRange{chosen->lo, chosen->hi}});
    }
  }
  validate_template(tmpl);
  return tmpl;
}

std::vector<SlotValue> draw_slot_values(const MaskedRuleTemplate& tmpl, Rng& rng) {
  std::vector<SlotValue> values;
  for (const auto& slot : tmpl.slots) {
    if (const auto* r = std::get_if<IntRange>(&slot.range)) {
      values.emplace_back(rng.between(r->lo, r->hi));
      continue;
    }
    const auto& l = std::get<LengthRange>(slot.range);
    const auto length = static_cast<std::size_t>(
        rng.between(static_cast<std::int64_t>(l.lo), static_cast<std::int64_t>(l.hi)));
    std::string word;
    do {
      word = rng.letters(length);
    } while (!word.empty() && word.find_first_not_of('A') == std::string::npos);
    values.emplace_back(std::move(word));
  }
  return values;
}

std::string to_string(const SlotValue& value) {
  if (const auto* n = std::get_if<std::int64_t>(&value)) return std::to_string(*n);
  return std::get<std::string>(value);
}

RuleText fill_masks(const RuleText& text, std::span<const MaskSlot> slots,
                    std::span<const SlotValue> values) {
  RuleText out = text;
  for (std::size_t i = 0; i < slots.size() && i < values.size(); ++i) {
    const std::string v = to_string(values[i]);
    for (std::string* field : {&out.method_chosen, &out.rule, &out.process, &out.key}) {
      replace_all(*field, slots[i].token, v);
    }
  }
  return out;
}

CipherRule apply_slots(const MaskedRuleTemplate& tmpl, std::span<const SlotValue> values,
                       std::string provenance) {
  if (values.size() != tmpl.slots.size()) {
    throw SlotError(SlotErrorKind::SlotCountMismatch,
                    "SlotCountMismatch(expected " + std::to_string(tmpl.slots.size()) + ", got " +
                        std::to_string(values.size()) + ")");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& slot = tmpl.slots[i];
    const std::string where = "ValueOutOfRange(" + slot.token + " = " + to_string(values[i]);
    if (const auto* r = std::get_if<IntRange>(&slot.range)) {
      const auto* n = std::get_if<std::int64_t>(&values[i]);
      if (!n) throw SlotError(SlotErrorKind::ValueOutOfRange, where + ": expected an integer)");
      if (*n < r->lo || *n > r->hi) {
        throw SlotError(SlotErrorKind::ValueOutOfRange,
                        where + " outside [" + std::to_string(r->lo) + ", " + std::to_string(r->hi) + "])");
      }
    } else {
      const auto& l = std::get<LengthRange>(slot.range);
      const auto* s = std::get_if<std::string>(&values[i]);
      if (!s) throw SlotError(SlotErrorKind::ValueOutOfRange, where + ": expected letters)");
      if (s->size() < l.lo || s->size() > l.hi ||
          !std::all_of(s->begin(), s->end(), [](char c) { return is_alpha(c); })) {
        throw SlotError(SlotErrorKind::ValueOutOfRange,
                        where + ": need " + std::to_string(l.lo) + " to " + std::to_string(l.hi) + " letters)");
      }
    }
  }
  RuleText filled = fill_masks(tmpl.text, tmpl.slots, values);
  KeyMaterial key;
  try {
    key = parse_key(tmpl.method, filled.key);
  } catch (const RuleParseError& e) {
    if (e.kind() != RuleErrorKind::UnparseableKey || values.size() != 1) throw;
    key = key_from_value(tmpl.method, values.front());
    validate_or_throw(key);
  }
  return CipherRule{std::move(key), std::move(filled), 0, std::move(provenance)};
}

}  // namespace cipherflow::rules
