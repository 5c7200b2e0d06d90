#pragma once

// Reference implementations used only by tests. They are written from the
// textbook definitions and share no code with the library.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace oracle {

std::string upper(std::string_view text);
std::string caesar(std::string_view text, int shift);
std::string vigenere(std::string_view text, std::string_view keyword, bool decrypt = false);
std::string atbash(std::string_view text);

// Letters in pairs, X between a doubled pair (Q for XX), trailing filler for
// an odd count. Fillers sit directly after the letter that precedes them.
std::string playfair_prepare(std::string_view text);
std::string playfair(std::string_view prepared, std::string_view keyword, bool decrypt = false);

std::string rail_fence(std::string_view text, int rails);
std::string rail_fence_decrypt(std::string_view text, int rails);

// "A:2 B:1" over the uppercase letters of `text`.
std::string frequency(std::string_view text);

// Standard deviation of one multinomial cell count.
double multinomial_sigma(std::size_t trials, double p);

}  // namespace oracle
