#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cipherflow/llm/prompts.hpp"
#include "cipherflow/rules.hpp"
#include "cipherflow/sections.hpp"

using namespace cipherflow;
using namespace cipherflow::rules;
using cipher::CipherMethod;

namespace {

const std::filesystem::path kGolden = std::filesystem::path(CIPHERFLOW_TEST_DATA_DIR) / "golden";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cipher::KeyMaterial key_from_expected(const nlohmann::json& e) {
  const auto method = *cipher::method_from_id(e.at("method").get<std::string>());
  const auto& k = e.at("key");
  switch (method) {
    case CipherMethod::Caesar: return cipher::CaesarKey{k.at("shift").get<int>()};
    case CipherMethod::Vigenere: return cipher::VigenereKey{k.at("keyword").get<std::string>()};
    case CipherMethod::Atbash: return cipher::AtbashKey{};
    case CipherMethod::Playfair: return cipher::PlayfairKey{k.at("keyword").get<std::string>()};
    case CipherMethod::RailFence: return cipher::RailFenceKey{k.at("rails").get<int>()};
  }
  return cipher::AtbashKey{};
}

}  // namespace

TEST(RuleGolden, EveryFileParsesAsExpected) {
  const auto expected = nlohmann::json::parse(slurp(kGolden / "rules" / "expected.json"));
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kGolden / "rules")) {
    if (entry.path().extension() != ".txt") continue;
    ++files;
    const std::string name = entry.path().filename().string();
    ASSERT_TRUE(expected.contains(name)) << "no expectation for " << name;
    const auto& e = expected.at(name);
    const std::string text = slurp(entry.path());
    if (e.contains("error")) {
      try {
        parse_rule(text);
        ADD_FAILURE() << name << " parsed but should fail";
      } catch (const RuleParseError& err) {
        EXPECT_EQ(to_string(err.kind()), e.at("error").get<std::string>()) << name;
      }
      continue;
    }
    try {
      const CipherRule rule = parse_rule(text);
      EXPECT_EQ(rule.key, key_from_expected(e)) << name;
    } catch (const RuleParseError& err) {
      ADD_FAILURE() << name << ": " << err.what();
    }
  }
  EXPECT_EQ(files, expected.size());
  EXPECT_GE(files, 15u);
}

TEST(RuleFormat, CanonicalTextRoundTrips) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    cipher::KeyMaterial key;
    switch (rng.below(5)) {
      case 0: key = cipher::CaesarKey{static_cast<int>(rng.between(1, 25))}; break;
      case 1: key = cipher::VigenereKey{rng.letters(static_cast<std::size_t>(rng.between(3, 10)))}; break;
      case 2: key = cipher::AtbashKey{}; break;
      case 3: key = cipher::PlayfairKey{rng.letters(static_cast<std::size_t>(rng.between(3, 10)))}; break;
      default: key = cipher::RailFenceKey{static_cast<int>(rng.between(2, 5))}; break;
    }
    if (auto* v = std::get_if<cipher::VigenereKey>(&key);
        v && v->keyword.find_first_not_of('A') == std::string::npos) {
      continue;
    }
    const CipherRule rule = make_rule(key);
    const CipherRule back = parse_rule(to_string(rule.text));
    ASSERT_EQ(back.key, key) << to_string(rule.text);
    ASSERT_EQ(extract_rule_text(to_string(rule.text)), rule.text);
  }
}

TEST(RuleFormat, SerializedTextHasFourLabelledLines) {
  const RuleText t = serialize_rule(cipher::KeyMaterial{cipher::CaesarKey{3}});
  const std::string s = to_string(t);
  EXPECT_EQ(s.rfind("Encryption Method Chosen: Caesar Cipher\nRule: ", 0), 0u);
  EXPECT_NE(s.find("\nKey: shift: 3\n"), std::string::npos);
}

TEST(RuleFormat, JsonRoundTrip) {
  CipherRule rule = make_rule(cipher::PlayfairKey{"MONARCHY"}, 9, "engine-filled; seed=1");
  const auto j = to_json(rule);
  EXPECT_EQ(j.at("method"), "Playfair");
  EXPECT_EQ(j.at("key").at("keyword"), "MONARCHY");
  const CipherRule back = rule_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.key, rule.key);
  EXPECT_EQ(back.round_id, 9u);
  EXPECT_EQ(back.text, rule.text);
  EXPECT_EQ(back.provenance, rule.provenance);
}

TEST(RuleFormat, MethodAliases) {
  EXPECT_EQ(identify_method("The Caesar shift"), CipherMethod::Caesar);
  EXPECT_EQ(identify_method("a zig-zag transposition"), CipherMethod::RailFence);
  EXPECT_EQ(identify_method("Vigen\xC3\xA8re"), CipherMethod::Vigenere);
  EXPECT_EQ(identify_method("PLAYFAIR"), CipherMethod::Playfair);
  EXPECT_EQ(identify_method("atbash"), CipherMethod::Atbash);
  // The first alias in the text decides.
  EXPECT_EQ(identify_method("Atbash, not Caesar"), CipherMethod::Atbash);
  try {
    identify_method("Enigma");
    FAIL();
  } catch (const RuleParseError& e) {
    EXPECT_EQ(e.kind(), RuleErrorKind::UnknownMethod);
  }
}

TEST(RuleFormat, KeyParsing) {
  EXPECT_EQ(parse_key(CipherMethod::Caesar, "shift = 4"), cipher::KeyMaterial{cipher::CaesarKey{4}});
  EXPECT_EQ(parse_key(CipherMethod::Caesar, "move each letter eleven places"),
            cipher::KeyMaterial{cipher::CaesarKey{11}});
  EXPECT_EQ(parse_key(CipherMethod::RailFence, "number of rails: 3"),
            cipher::KeyMaterial{cipher::RailFenceKey{3}});
  EXPECT_EQ(parse_key(CipherMethod::Vigenere, "keyword: KEY"),
            cipher::KeyMaterial{cipher::VigenereKey{"KEY"}});
  EXPECT_EQ(parse_key(CipherMethod::Playfair, "THE"), cipher::KeyMaterial{cipher::PlayfairKey{"THE"}});
  const auto kind_of = [](CipherMethod m, const char* text) {
    try {
      parse_key(m, text);
    } catch (const RuleParseError& e) {
      return e.kind();
    }
    return RuleErrorKind::MissingSection;  // sentinel: no error
  };
  EXPECT_EQ(kind_of(CipherMethod::Caesar, "shift: -3"), RuleErrorKind::KeyOutOfRange);
  EXPECT_EQ(kind_of(CipherMethod::Caesar, "shift: 26"), RuleErrorKind::KeyOutOfRange);
  EXPECT_EQ(kind_of(CipherMethod::Caesar, "a secret amount"), RuleErrorKind::UnparseableKey);
  EXPECT_EQ(kind_of(CipherMethod::Caesar, "3 or 5"), RuleErrorKind::UnparseableKey);
  EXPECT_EQ(kind_of(CipherMethod::RailFence, "rails: 9"), RuleErrorKind::KeyOutOfRange);
  EXPECT_EQ(kind_of(CipherMethod::Vigenere, "keyword: AB"), RuleErrorKind::KeyOutOfRange);
  EXPECT_EQ(kind_of(CipherMethod::Vigenere, "keyword: K3Y"), RuleErrorKind::KeyOutOfRange);
}

TEST(RuleFormat, MissingSection) {
  try {
    parse_rule("Encryption Method Chosen: Caesar\nRule: x\nKey: shift 3\n");
    FAIL();
  } catch (const RuleParseError& e) {
    EXPECT_EQ(e.kind(), RuleErrorKind::MissingSection);
    EXPECT_NE(std::string(e.what()).find("Process"), std::string::npos);
  }
}

TEST(Sections, LabelsTolerateMarkup) {
  const std::string text = "## **Ciphertext Answer**: KHOOR\n";
  const std::vector<std::string_view> labels = {"Ciphertext Answer:"};
  EXPECT_EQ(section_content(text, "Ciphertext Answer:", labels).value_or(""), "KHOOR");
  EXPECT_FALSE(section_content("Ciphertext Answers: X", "Ciphertext Answer:", labels));
  EXPECT_FALSE(section_content("Ciphertext Answer X", "Ciphertext Answer:", labels));
}

// --- mask protocol -------------------------------------------------------

TEST(MaskProtocol, CanonicalTemplatesAreValid) {
  for (const auto m : cipher::kAllMethods) {
    const auto t = canonical_template(m);
    EXPECT_NO_THROW(validate_template(t)) << cipher::method_id(m);
    const std::string all = to_string(t.text);
    if (m == CipherMethod::Atbash) {
      EXPECT_TRUE(t.slots.empty());
    } else {
      ASSERT_EQ(t.slots.size(), 1u);
      EXPECT_EQ(t.slots[0].token, "<MASK_1>");
      EXPECT_NE(t.text.key.find("<MASK_1>"), std::string::npos);
    }
    // Numbers in a masked rule appear only as masks.
    std::string bare = all;
    for (std::size_t pos; (pos = bare.find("<MASK_")) != std::string::npos;) {
      bare.erase(pos, bare.find('>', pos) - pos + 1);
    }
    EXPECT_EQ(bare.find_first_of("0123456789"), std::string::npos) << all;
  }
}

TEST(MaskProtocol, CanonicalizesSpellings) {
  EXPECT_EQ(canonicalize_masks("shift by [MASK]"), "shift by <MASK_1>");
  EXPECT_EQ(canonicalize_masks("a {mask_2} and <mask>"), "a <MASK_2> and <MASK_1>");
  EXPECT_EQ(canonicalize_masks("MASK_3 rails"), "<MASK_3> rails");
  EXPECT_EQ(canonicalize_masks("Masking tape"), "Masking tape");
  // Bare masks all refer to one value.
  EXPECT_EQ(canonicalize_masks("by [MASK], key [MASK]"), "by <MASK_1>, key <MASK_1>");
  EXPECT_EQ(canonicalize_masks("<MASK_1> then [MASK]"), "<MASK_1> then <MASK_2>");
  EXPECT_EQ(mask_tokens_in("<MASK_2> <MASK_1> <MASK_2>"),
            (std::vector<std::string>{"<MASK_1>", "<MASK_2>"}));
}

TEST(MaskProtocol, ThreePhasesWithFreeFormReplies) {
  const auto draft = parse_masked_rule(
      "**Encryption Method Chosen:** Caesar Cipher\n**Rule:** shift letters by [MASK].\n"
      "**Process:** add [MASK] to each letter.\n**Key:** shift = [MASK]\n");
  EXPECT_EQ(draft.method, CipherMethod::Caesar);
  ASSERT_EQ(draft.tokens, (std::vector<std::string>{"<MASK_1>"}));
  const auto tmpl = parse_slot_ranges(draft, "The mask can be any whole number from 1 to 25.");
  ASSERT_EQ(tmpl.slots.size(), 1u);
  EXPECT_EQ(tmpl.slots[0].range, (SlotRange{IntRange{1, 25}}));
  const std::vector<SlotValue> values = {std::int64_t{13}};
  const CipherRule rule = apply_slots(tmpl, values, "engine-filled");
  EXPECT_EQ(rule.key, cipher::KeyMaterial{cipher::CaesarKey{13}});
  EXPECT_NE(rule.text.process.find("13"), std::string::npos);
}

TEST(MaskProtocol, KeywordRangesAreLengths) {
  const auto draft = parse_masked_rule(to_string(canonical_template(CipherMethod::Vigenere).text));
  const auto tmpl = parse_slot_ranges(draft, "<MASK_1> is a word of 4 to 6 letters");
  EXPECT_EQ(tmpl.slots[0].range, (SlotRange{LengthRange{4, 6}}));
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto v = draw_slot_values(tmpl, rng);
    const auto& w = std::get<std::string>(v.at(0));
    ASSERT_GE(w.size(), 4u);
    ASSERT_LE(w.size(), 6u);
    ASSERT_NE(w.find_first_not_of('A'), std::string::npos);
  }
}

TEST(MaskProtocol, SlotErrors) {
  const auto tmpl = canonical_template(CipherMethod::Caesar);
  try {
    apply_slots(tmpl, std::vector<SlotValue>{});
    FAIL();
  } catch (const SlotError& e) {
    EXPECT_EQ(e.kind(), SlotErrorKind::SlotCountMismatch);
  }
  try {
    apply_slots(tmpl, std::vector<SlotValue>{std::int64_t{99}});
    FAIL();
  } catch (const SlotError& e) {
    EXPECT_EQ(e.kind(), SlotErrorKind::ValueOutOfRange);
  }
  auto broken = tmpl;
  broken.slots.push_back({"<MASK_2>", IntRange{1, 2}});
  EXPECT_THROW(validate_template(broken), TemplateError);
  auto empty = tmpl;
  empty.slots[0].range = IntRange{5, 1};
  EXPECT_THROW(validate_template(empty), TemplateError);
}

TEST(MaskProtocol, DrawsAreUniformWithinRange) {
  const auto tmpl = canonical_template(CipherMethod::RailFence);
  Rng rng(11);
  std::map<std::int64_t, int> seen;
  for (int i = 0; i < 4000; ++i) ++seen[std::get<std::int64_t>(draw_slot_values(tmpl, rng)[0])];
  ASSERT_EQ(seen.size(), 4u);
  for (const auto& [v, n] : seen) {
    EXPECT_GE(v, 2);
    EXPECT_LE(v, 5);
    EXPECT_NEAR(n, 1000, 120);
  }
}

// --- fuzzing ---------------------------------------------------------------

TEST(RuleFuzz, RandomBytesOnlyRaiseStructuredErrors) {
  Rng rng(424242);
  const std::vector<std::string_view> fragments = {
      "Encryption Method Chosen:", "Rule:", "Process:", "Key:", "Caesar", "rails", "<MASK_1>",
      "[MASK]", "shift", "keyword", "**", "\n", ":", "-", "12", "from 1 to"};
  int structured = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    const auto len = rng.below(200);
    for (std::uint64_t k = 0; k < len; ++k) {
      if (rng.below(8) == 0) s += fragments[rng.below(fragments.size())];
      else s.push_back(static_cast<char>(rng.below(256)));
    }
    try {
      (void)parse_rule(s);
    } catch (const RuleParseError&) {
      ++structured;
    } catch (const cipherflow::Error&) {
      ++structured;
    } catch (const std::exception& e) {
      FAIL() << "unstructured exception on case " << i << ": " << e.what();
    }
    try {
      const auto draft = parse_masked_rule(s);
      (void)parse_slot_ranges(draft, s);
    } catch (const cipherflow::Error&) {
    } catch (const std::exception& e) {
      FAIL() << "unstructured exception on case " << i << ": " << e.what();
    }
    try {
      (void)llm::extract_section(s, llm::kCiphertextAnswer);
    } catch (const cipherflow::Error&) {
    } catch (const std::exception& e) {
      FAIL() << "unstructured exception on case " << i << ": " << e.what();
    }
    (void)canonicalize_masks(s);
  }
  EXPECT_GT(structured, 9000);
}
