#include "cipherflow/cipher.hpp"

#include <algorithm>
#include <vector>

namespace cipherflow::cipher {
namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_letter(char c) { return is_upper(c) || is_lower(c); }
char to_upper(char c) { return is_lower(c) ? static_cast<char>(c - 'a' + 'A') : c; }

char shift_letter(char c, int shift) {
  const int offset = ((c - 'A' + shift) % 26 + 26) % 26;
  return static_cast<char>('A' + offset);
}

// Uppercase A-Z copy of a keyword. Caller has validated it.
std::string upper_keyword(std::string_view keyword) {
  std::string out;
  out.reserve(keyword.size());
  for (char c : keyword) out.push_back(to_upper(c));
  return out;
}

void validate_keyword(std::string_view keyword, std::string_view what) {
  if (keyword.size() < kMinKeywordLength || keyword.size() > kMaxKeywordLength) {
    throw InvalidKey(std::string(what) + " keyword length " +
                     std::to_string(keyword.size()) + " outside [" +
                     std::to_string(kMinKeywordLength) + ", " +
                     std::to_string(kMaxKeywordLength) + "]");
  }
  for (char c : keyword) {
    if (!is_letter(c)) {
      throw InvalidKey(std::string(what) + " keyword must contain only A-Z");
    }
  }
}

std::string caesar(std::string_view text, int shift) {
  std::string out = normalize(text);
  for (auto& c : out) {
    if (is_upper(c)) c = shift_letter(c, shift);
  }
  return out;
}

std::string vigenere(std::string_view text, std::string_view keyword, int direction) {
  const std::string key = upper_keyword(keyword);
  std::string out = normalize(text);
  std::size_t k = 0;
  for (auto& c : out) {
    if (!is_upper(c)) continue;
    c = shift_letter(c, direction * (key[k % key.size()] - 'A'));
    ++k;
  }
  return out;
}

std::string atbash(std::string_view text) {
  std::string out = normalize(text);
  for (auto& c : out) {
    if (is_upper(c)) c = static_cast<char>('Z' - (c - 'A'));
  }
  return out;
}

// Zigzag rail index for each position of a text of length n.
std::vector<int> rail_pattern(std::size_t n, int rails) {
  std::vector<int> pattern(n);
  int rail = 0;
  int step = 1;
  for (std::size_t i = 0; i < n; ++i) {
    pattern[i] = rail;
    if (rail == 0) step = 1;
    else if (rail == rails - 1) step = -1;
    rail += step;
  }
  return pattern;
}

// Positions of the text in ciphertext order: rail by rail, left to right.
std::vector<std::size_t> rail_order(std::size_t n, int rails) {
  const auto pattern = rail_pattern(n, rails);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (int r = 0; r < rails; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      if (pattern[i] == r) order.push_back(i);
    }
  }
  return order;
}

std::string rail_fence_encrypt(std::string_view text, int rails) {
  const std::string in = normalize(text);
  const auto order = rail_order(in.size(), rails);
  std::string out;
  out.reserve(in.size());
  for (std::size_t pos : order) out.push_back(in[pos]);
  return out;
}

std::string rail_fence_decrypt(std::string_view text, int rails) {
  const std::string in = normalize(text);
  const auto order = rail_order(in.size(), rails);
  std::string out(in.size(), '\0');
  for (std::size_t i = 0; i < order.size(); ++i) out[order[i]] = in[i];
  return out;
}

struct GridIndex {
  PlayfairGrid grid{};
  std::array<std::pair<int, int>, 26> where{};
};

GridIndex index_grid(std::string_view keyword) {
  GridIndex g;
  g.grid = playfair_matrix(keyword);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) g.where[g.grid[r][c] - 'A'] = {r, c};
  }
  g.where['J' - 'A'] = g.where['I' - 'A'];
  return g;
}

// direction +1 encrypts, -1 decrypts. `text` is already in canonical form.
std::string playfair_transform(std::string text, std::string_view keyword, int direction) {
  const GridIndex g = index_grid(keyword);
  std::vector<std::size_t> letters;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_upper(text[i])) letters.push_back(i);
  }
  if (letters.size() % 2 != 0) {
    throw OddLengthCiphertext("playfair text has an odd number of letters (" +
                              std::to_string(letters.size()) + ")");
  }
  const auto wrap = [direction](int v) { return ((v + direction) % 5 + 5) % 5; };
  for (std::size_t i = 0; i < letters.size(); i += 2) {
    char& a = text[letters[i]];
    char& b = text[letters[i + 1]];
    const auto [ra, ca] = g.where[a - 'A'];
    const auto [rb, cb] = g.where[b - 'A'];
    if (ra == rb) {
      a = g.grid[ra][wrap(ca)];
      b = g.grid[rb][wrap(cb)];
    } else if (ca == cb) {
      a = g.grid[wrap(ra)][ca];
      b = g.grid[wrap(rb)][cb];
    } else {
      a = g.grid[ra][cb];
      b = g.grid[rb][ca];
    }
  }
  return text;
}

}  // namespace

std::string_view method_id(CipherMethod method) {
  switch (method) {
    case CipherMethod::Caesar: return "Caesar";
    case CipherMethod::Vigenere: return "Vigenere";
    case CipherMethod::Atbash: return "Atbash";
    case CipherMethod::Playfair: return "Playfair";
    case CipherMethod::RailFence: return "RailFence";
  }
  return "";
}

std::string_view display_name(CipherMethod method) {
  if (method == CipherMethod::Vigenere) return "Vigen\xC3\xA8re";
  return method_id(method);
}

std::optional<CipherMethod> method_from_id(std::string_view name) {
  const auto equals_ci = [](std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(),
                      [](char x, char y) { return to_upper(x) == to_upper(y); });
  };
  for (CipherMethod m : kAllMethods) {
    if (equals_ci(name, method_id(m)) || equals_ci(name, display_name(m))) return m;
  }
  return std::nullopt;
}

CipherMethod method_of(const KeyMaterial& key) {
  return static_cast<CipherMethod>(key.index());
}

void validate_key(const KeyMaterial& key) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, CaesarKey>) {
          if (k.shift < kMinShift || k.shift > kMaxShift) {
            throw InvalidKey("caesar shift " + std::to_string(k.shift) +
                             " outside [1, 25]");
          }
        } else if constexpr (std::is_same_v<K, VigenereKey>) {
          validate_keyword(k.keyword, "vigenere");
          if (std::all_of(k.keyword.begin(), k.keyword.end(),
                          [](char c) { return to_upper(c) == 'A'; })) {
            throw InvalidKey("vigenere keyword of only 'A' is the identity");
          }
        } else if constexpr (std::is_same_v<K, PlayfairKey>) {
          validate_keyword(k.keyword, "playfair");
        } else if constexpr (std::is_same_v<K, RailFenceKey>) {
          if (k.rails < kMinRails || k.rails > kMaxRails) {
            throw InvalidKey("rail count " + std::to_string(k.rails) +
                             " outside [2, 5]");
          }
        }
      },
      key);
}

std::string normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto byte = static_cast<unsigned char>(text[i]);
    if (byte >= 0x80) {
      throw NormalizationError("non-ASCII byte 0x" +
                               std::string{"0123456789ABCDEF"[byte >> 4]} +
                               "0123456789ABCDEF"[byte & 0xF] + " at offset " +
                               std::to_string(i));
    }
    out.push_back(to_upper(text[i]));
  }
  return out;
}

std::string playfair_normalize(std::string_view text) {
  std::string in = normalize(text);
  for (auto& c : in) {
    if (c == 'J') c = 'I';
  }
  std::string out;
  out.reserve(in.size() + in.size() / 2 + 1);
  // Tracks whether the last emitted letter opens a digraph still waiting for
  // its partner.
  bool open = false;
  char pending = 0;
  std::size_t last_letter_end = 0;
  for (char c : in) {
    if (!is_upper(c)) {
      out.push_back(c);
      continue;
    }
    if (open && c == pending) {
      out.insert(last_letter_end, 1, pending == 'X' ? 'Q' : 'X');
      // The inserted filler closes the pending digraph; c opens a new one.
      out.push_back(c);
      pending = c;
      open = true;
    } else {
      out.push_back(c);
      pending = c;
      open = !open;
    }
    last_letter_end = out.size();
  }
  if (open) out.insert(last_letter_end, 1, pending == 'X' ? 'Q' : 'X');
  return out;
}

std::string canonical_plaintext(CipherMethod method, std::string_view text) {
  return method == CipherMethod::Playfair ? playfair_normalize(text) : normalize(text);
}

PlayfairGrid playfair_matrix(std::string_view keyword) {
  validate_keyword(keyword, "playfair");
  std::array<bool, 26> used{};
  used['J' - 'A'] = true;
  std::string order;
  const auto take = [&](char c) {
    c = to_upper(c);
    if (c == 'J') c = 'I';
    if (!used[c - 'A']) {
      used[c - 'A'] = true;
      order.push_back(c);
    }
  };
  for (char c : keyword) take(c);
  for (char c = 'A'; c <= 'Z'; ++c) take(c);
  PlayfairGrid grid{};
  for (std::size_t i = 0; i < 25; ++i) grid[i / 5][i % 5] = order[i];
  return grid;
}

std::string encrypt(const KeyMaterial& key, std::string_view plaintext) {
  validate_key(key);
  return std::visit(
      [plaintext](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, CaesarKey>) return caesar(plaintext, k.shift);
        else if constexpr (std::is_same_v<K, VigenereKey>) return vigenere(plaintext, k.keyword, +1);
        else if constexpr (std::is_same_v<K, AtbashKey>) return atbash(plaintext);
        else if constexpr (std::is_same_v<K, PlayfairKey>)
          return playfair_transform(playfair_normalize(plaintext), k.keyword, +1);
        else return rail_fence_encrypt(plaintext, k.rails);
      },
      key);
}

std::string decrypt(const KeyMaterial& key, std::string_view ciphertext) {
  validate_key(key);
  return std::visit(
      [ciphertext](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, CaesarKey>) return caesar(ciphertext, -k.shift);
        else if constexpr (std::is_same_v<K, VigenereKey>) return vigenere(ciphertext, k.keyword, -1);
        else if constexpr (std::is_same_v<K, AtbashKey>) return atbash(ciphertext);
        else if constexpr (std::is_same_v<K, PlayfairKey>) {
          std::string text = normalize(ciphertext);
          std::replace(text.begin(), text.end(), 'J', 'I');
          return playfair_transform(std::move(text), k.keyword, -1);
        } else return rail_fence_decrypt(ciphertext, k.rails);
      },
      key);
}

std::map<char, std::size_t> letter_frequency(std::string_view text) {
  std::map<char, std::size_t> counts;
  for (char c : text) {
    if (is_letter(c)) ++counts[to_upper(c)];
  }
  return counts;
}

}  // namespace cipherflow::cipher
