#pragma once

#include <stdexcept>
#include <string>

namespace gha {

enum class ErrorKind {
  InvalidData,  // non-finite or otherwise unusable values
  Shape,        // dimension mismatch or out-of-range size
  Arity,        // too few subjects / matrices
  Degeneracy,   // rank deficiency where a unique answer is required
  Divergence,   // non-finite intermediate during optimization
  Label,        // classifier label problems
  Spec,         // invalid generator or sweep specification
  Format,       // on-disk format / IO problems
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure surfaced by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Same kind, message prefixed with `context: `.
  Error with_context(const std::string& context) const {
    return Error(kind_, context + ": " + what());
  }

 private:
  ErrorKind kind_;
};

/// True for errors caused by numerical failure rather than bad input.
inline bool is_numerical(ErrorKind kind) noexcept {
  return kind == ErrorKind::Degeneracy || kind == ErrorKind::Divergence;
}

}  // namespace gha
