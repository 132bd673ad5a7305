#pragma once

#include <stdexcept>
#include <string>

namespace matilda {

// Malformed or inconsistent input data (corpus files, alignments, dumps).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid invocation: bad flag combinations, unknown modes, missing inputs.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace matilda
