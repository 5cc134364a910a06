#pragma once

#include <stdexcept>
#include <string>

namespace xlingual {

// Failure categories. The CLI maps these onto its exit codes.
enum class ErrorKind {
  InvalidArgument,
  Parse,
  EmptySeed,
  Divergence,
  NoEvaluable,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace xlingual
