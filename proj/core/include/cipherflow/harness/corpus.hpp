#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "cipherflow/cipher.hpp"
#include "cipherflow/error.hpp"

namespace cipherflow::harness {

class CorpusError : public Error {
 public:
  using Error::Error;
};

// Fifty frozen ASCII sentences, 10 to 120 characters each.
const std::vector<std::string>& builtin_corpus();

// One plaintext per line. Blank lines and lines starting with '#' are
// skipped, a trailing '\r' is dropped. Throws CorpusError when the file is
// unreadable, is not valid UTF-8 or yields no plaintexts.
std::vector<std::string> load_corpus(const std::filesystem::path& file);

struct PreflightFailure {
  std::size_t index = 0;
  cipher::CipherMethod method{};
  std::string detail;
};

// Round-trips every entry under each method with a fixed key.
std::vector<PreflightFailure> preflight(const std::vector<std::string>& corpus);

// Throws CorpusError describing the first preflight failure, if any.
void require_preflight(const std::vector<std::string>& corpus);

}  // namespace cipherflow::harness
