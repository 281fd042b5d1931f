#pragma once

#include <stdexcept>
#include <string>

namespace nlab {

// Bad parameters, spec violations, schema errors. The CLI maps these to exit
// code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that ran but produced an unusable result (aliasing, a
// non-convergent iteration). The CLI maps these to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AliasingError : public NumericError {
 public:
  using NumericError::NumericError;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

}  // namespace nlab
