#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "cipherflow/error.hpp"

namespace cipherflow::cipher {

enum class CipherMethod { Caesar, Vigenere, Atbash, Playfair, RailFence };

inline constexpr std::array<CipherMethod, 5> kAllMethods = {
    CipherMethod::Caesar, CipherMethod::Vigenere, CipherMethod::Atbash,
    CipherMethod::Playfair, CipherMethod::RailFence};

// ASCII identifier used in JSON and on the command line ("Vigenere").
std::string_view method_id(CipherMethod method);
// Human-facing name used in rule text and reports ("Vigenère").
std::string_view display_name(CipherMethod method);
// Exact, case-insensitive match against method_id or display_name.
std::optional<CipherMethod> method_from_id(std::string_view name);

// Key ranges. Chosen so that no valid key is an identity transformation.
inline constexpr int kMinShift = 1;
inline constexpr int kMaxShift = 25;
inline constexpr std::size_t kMinKeywordLength = 3;
inline constexpr std::size_t kMaxKeywordLength = 10;
inline constexpr int kMinRails = 2;
inline constexpr int kMaxRails = 5;

struct CaesarKey {
  int shift = 0;
  friend bool operator==(const CaesarKey&, const CaesarKey&) = default;
};
struct VigenereKey {
  std::string keyword;
  friend bool operator==(const VigenereKey&, const VigenereKey&) = default;
};
struct AtbashKey {
  friend bool operator==(const AtbashKey&, const AtbashKey&) = default;
};
struct PlayfairKey {
  std::string keyword;
  friend bool operator==(const PlayfairKey&, const PlayfairKey&) = default;
};
struct RailFenceKey {
  int rails = 0;
  friend bool operator==(const RailFenceKey&, const RailFenceKey&) = default;
};

// Alternative order matches CipherMethod.
using KeyMaterial =
    std::variant<CaesarKey, VigenereKey, AtbashKey, PlayfairKey, RailFenceKey>;

CipherMethod method_of(const KeyMaterial& key);

class InvalidKey : public Error {
 public:
  using Error::Error;
};

// Raised for input text outside 7-bit ASCII.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

class OddLengthCiphertext : public Error {
 public:
  using Error::Error;
};

// Throws InvalidKey when the key violates its method's range. Keywords must
// be A-Z (case-insensitive) and must not consist solely of 'A'.
void validate_key(const KeyMaterial& key);

// Uppercases ASCII letters and leaves every other ASCII byte unchanged.
std::string normalize(std::string_view text);

// normalize(), then J->I, then filler insertion over the letter subsequence:
// a doubled letter inside a digraph gets 'X' between (or 'Q' when the
// doubled letter is itself 'X'), and an odd letter count gets a trailing
// filler right after the last letter. Non-letters keep their position.
std::string playfair_normalize(std::string_view text);

// The plaintext a perfect round trip under `method` yields for `text`.
std::string canonical_plaintext(CipherMethod method, std::string_view text);

using PlayfairGrid = std::array<std::array<char, 5>, 5>;
PlayfairGrid playfair_matrix(std::string_view keyword);

std::string encrypt(const KeyMaterial& key, std::string_view plaintext);
std::string decrypt(const KeyMaterial& key, std::string_view ciphertext);

// Case-insensitive A-Z counts. Letters not present are absent from the map.
std::map<char, std::size_t> letter_frequency(std::string_view text);

}  // namespace cipherflow::cipher
