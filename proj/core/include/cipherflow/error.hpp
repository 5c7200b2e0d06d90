#pragma once

#include <stdexcept>
#include <string>

namespace cipherflow {

// Root of every exception thrown by the library. Callers that only need to
// distinguish "our failure" from anything else can catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cipherflow
