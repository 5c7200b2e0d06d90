#include <gtest/gtest.h>

#include <string>

#include "../support/oracles.hpp"
#include "cipherflow/cipher.hpp"
#include "cipherflow/rng.hpp"

using namespace cipherflow::cipher;
using cipherflow::Rng;

namespace {

std::string random_ascii(Rng& rng, std::size_t max_len) {
  // Printable ASCII plus tab and newline, biased towards letters.
  static const std::string pool =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"
      "     0123456789.,;:!?'\"()-_/\t\n";
  std::string s(static_cast<std::size_t>(rng.below(max_len + 1)), ' ');
  for (auto& c : s) c = pool[static_cast<std::size_t>(rng.below(pool.size()))];
  return s;
}

KeyMaterial random_key(CipherMethod m, Rng& rng) {
  switch (m) {
    case CipherMethod::Caesar: return CaesarKey{static_cast<int>(rng.between(1, 25))};
    case CipherMethod::Vigenere: {
      std::string k;
      do k = rng.letters(static_cast<std::size_t>(rng.between(3, 10)));
      while (k.find_first_not_of('A') == std::string::npos);
      return VigenereKey{k};
    }
    case CipherMethod::Atbash: return AtbashKey{};
    case CipherMethod::Playfair:
      return PlayfairKey{rng.letters(static_cast<std::size_t>(rng.between(3, 10)))};
    case CipherMethod::RailFence: return RailFenceKey{static_cast<int>(rng.between(2, 5))};
  }
  return AtbashKey{};
}

std::string oracle_encrypt(const KeyMaterial& key, const std::string& p) {
  if (auto* k = std::get_if<CaesarKey>(&key)) return oracle::caesar(p, k->shift);
  if (auto* k = std::get_if<VigenereKey>(&key)) return oracle::vigenere(p, k->keyword);
  if (std::holds_alternative<AtbashKey>(key)) return oracle::atbash(p);
  if (auto* k = std::get_if<PlayfairKey>(&key)) {
    return oracle::playfair(oracle::playfair_prepare(p), k->keyword);
  }
  return oracle::rail_fence(p, std::get<RailFenceKey>(key).rails);
}

}  // namespace

TEST(CipherVectors, CaesarShiftThree) {
  EXPECT_EQ(encrypt(CaesarKey{3}, "hello"), "KHOOR");
  EXPECT_EQ(decrypt(CaesarKey{3}, "KHOOR"), "HELLO");
  EXPECT_EQ(encrypt(CaesarKey{1}, "XYZ, abc!"), "YZA, BCD!");
}

TEST(CipherVectors, VigenereLemon) {
  EXPECT_EQ(encrypt(VigenereKey{"LEMON"}, "ATTACKATDAWN"), "LXFOPVEFRNHR");
  // The key only advances on letters.
  EXPECT_EQ(encrypt(VigenereKey{"LEMON"}, "ATTACK AT DAWN"), "LXFOPV EF RNHR");
  EXPECT_EQ(decrypt(VigenereKey{"lemon"}, "LXFOPV EF RNHR"), "ATTACK AT DAWN");
}

TEST(CipherVectors, AtbashIsAnInvolution) {
  EXPECT_EQ(encrypt(AtbashKey{}, "Wizard"), "DRAZIW");
  EXPECT_EQ(decrypt(AtbashKey{}, "DRAZIW"), "WIZARD");
}

TEST(CipherVectors, PlayfairStandardExample) {
  const std::string p = playfair_normalize("Hide the gold in the tree stump");
  EXPECT_EQ(p, "HIDE THE GOLD IN THE TREXE STUMP");
  EXPECT_EQ(encrypt(PlayfairKey{"MONARCHY"}, "INSTRUMENTS"), "GATLMZCLRQXA");
  EXPECT_EQ(encrypt(PlayfairKey{"MONARCHY"}, "INSTRUMENTS"),
            oracle::playfair(oracle::playfair_prepare("INSTRUMENTS"), "MONARCHY"));
}

TEST(CipherVectors, PlayfairMatrix) {
  const auto g = playfair_matrix("MONARCHY");
  const char* rows[] = {"MONAR", "CHYBD", "EFGIK", "LPQST", "UVWXZ"};
  for (int r = 0; r < 5; ++r) {
    EXPECT_EQ(std::string(g[r].begin(), g[r].end()), rows[r]) << "row " << r;
  }
  // J folds into I.
  const auto j = playfair_matrix("JAZZ");
  EXPECT_EQ(std::string(j[0].begin(), j[0].end()), "IAZBC");
}

TEST(CipherVectors, RailFenceThreeRails) {
  EXPECT_EQ(encrypt(RailFenceKey{3}, "WEAREDISCOVEREDFLEEATONCE"), "WECRLTEERDSOEEFEAOCAIVDEN");
  EXPECT_EQ(decrypt(RailFenceKey{3}, "WECRLTEERDSOEEFEAOCAIVDEN"), "WEAREDISCOVEREDFLEEATONCE");
  // Spaces and punctuation are transposed like any other character.
  EXPECT_EQ(encrypt(RailFenceKey{2}, "ab cd"), "A DBC");
}

TEST(CipherNormalization, UppercasesAsciiAndKeepsTheRest) {
  EXPECT_EQ(normalize("Hello, World 42!\n"), "HELLO, WORLD 42!\n");
  EXPECT_EQ(normalize(""), "");
}

TEST(CipherNormalization, RejectsNonAscii) {
  EXPECT_THROW(normalize("caf\xC3\xA9"), NormalizationError);
  EXPECT_THROW(encrypt(CaesarKey{3}, "\xFF"), NormalizationError);
}

TEST(CipherNormalization, PlayfairFillers) {
  EXPECT_EQ(playfair_normalize("balloon"), "BALXLOON");
  EXPECT_EQ(playfair_normalize("cat"), "CATX");
  EXPECT_EQ(playfair_normalize("xx"), "XQXQ");
  EXPECT_EQ(playfair_normalize("jar"), "IARX");
  // Fillers follow the letter they pair with, ahead of any punctuation.
  EXPECT_EQ(playfair_normalize("see, 1"), "SEEX, 1");
  EXPECT_EQ(playfair_normalize("no letters 123"), "NO LETXTERS 123");
  EXPECT_EQ(playfair_normalize("42"), "42");
}

TEST(CipherErrors, KeyRanges) {
  EXPECT_THROW(validate_key(CaesarKey{0}), InvalidKey);
  EXPECT_THROW(validate_key(CaesarKey{26}), InvalidKey);
  EXPECT_NO_THROW(validate_key(CaesarKey{25}));
  EXPECT_THROW(validate_key(VigenereKey{"AB"}), InvalidKey);
  EXPECT_THROW(validate_key(VigenereKey{"ABCDEFGHIJK"}), InvalidKey);
  EXPECT_THROW(validate_key(VigenereKey{"AAAA"}), InvalidKey);
  EXPECT_THROW(validate_key(VigenereKey{"AB1"}), InvalidKey);
  EXPECT_THROW(validate_key(PlayfairKey{"no spaces"}), InvalidKey);
  EXPECT_THROW(validate_key(RailFenceKey{1}), InvalidKey);
  EXPECT_THROW(validate_key(RailFenceKey{6}), InvalidKey);
  EXPECT_THROW(encrypt(CaesarKey{30}, "abc"), InvalidKey);
}

TEST(CipherErrors, PlayfairOddCiphertext) {
  EXPECT_THROW(decrypt(PlayfairKey{"MONARCHY"}, "ABC"), OddLengthCiphertext);
}

TEST(CipherMethods, Identifiers) {
  EXPECT_EQ(method_id(CipherMethod::Vigenere), "Vigenere");
  EXPECT_EQ(display_name(CipherMethod::Vigenere), "Vigen\xC3\xA8re");
  EXPECT_EQ(method_from_id("railfence"), CipherMethod::RailFence);
  // Only ASCII letters are case-folded.
  EXPECT_EQ(method_from_id("VIGEN\xC3\xA8RE"), CipherMethod::Vigenere);
  EXPECT_EQ(method_from_id("VIGEN\xC3\x88RE"), std::nullopt);
  EXPECT_EQ(method_from_id("Vigen\xC3\xA8re"), CipherMethod::Vigenere);
  EXPECT_EQ(method_from_id("enigma"), std::nullopt);
  EXPECT_EQ(method_of(KeyMaterial{RailFenceKey{3}}), CipherMethod::RailFence);
}

TEST(CipherFrequency, CountsLettersCaseInsensitively) {
  const auto f = letter_frequency("Aab, B!");
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f.at('A'), 2u);
  EXPECT_EQ(f.at('B'), 2u);
}

// --- properties against the oracles ------------------------------------

class CipherProperty : public ::testing::TestWithParam<CipherMethod> {};

TEST_P(CipherProperty, MatchesOracleAndRoundTrips) {
  const CipherMethod m = GetParam();
  Rng rng(cipherflow::derive_seed(20240611, static_cast<std::uint64_t>(m)));
  for (int i = 0; i < 1000; ++i) {
    const KeyMaterial key = random_key(m, rng);
    const std::string p = random_ascii(rng, 80);
    const std::string c = encrypt(key, p);
    ASSERT_EQ(c, oracle_encrypt(key, p)) << "case " << i << " input '" << p << "'";
    ASSERT_EQ(decrypt(key, c), canonical_plaintext(m, p)) << "case " << i;
  }
}

TEST_P(CipherProperty, NonTrivialKeysChangeLetters) {
  const CipherMethod m = GetParam();
  Rng rng(cipherflow::derive_seed(77, static_cast<std::uint64_t>(m)));
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const KeyMaterial key = random_key(m, rng);
    // Longer than any keyword, so every Vigenere key letter is used.
    std::string p = rng.letters(static_cast<std::size_t>(rng.between(12, 40)));
    if (m == CipherMethod::RailFence && p.find_first_not_of(p[0]) == std::string::npos) continue;
    EXPECT_NE(encrypt(key, p), canonical_plaintext(m, p)) << "case " << i;
    ++checked;
  }
  EXPECT_GT(checked, 900);
}

INSTANTIATE_TEST_SUITE_P(AllMethods, CipherProperty, ::testing::ValuesIn(kAllMethods),
                         [](const auto& info) { return std::string(method_id(info.param)); });
