#pragma once

#include <stdexcept>
#include <string>

namespace tf {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntaxError : Error {
  int line;
  int col;
  SyntaxError(const std::string& msg, int line_, int col_)
      : Error(std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg), line(line_), col(col_) {}
};

struct UndeclaredIdentifier : Error {
  using Error::Error;
};
struct TypeAnnotationMissing : Error {
  using Error::Error;
};
struct UnknownRole : Error {
  using Error::Error;
};
struct UnknownVariable : Error {
  using Error::Error;
};
struct IllTypedHonestSubstitution : Error {
  using Error::Error;
};
struct ImpureProblem : Error {
  using Error::Error;
};
struct Conflict : Error {
  using Error::Error;
};
struct RuleNotApplicable : Error {
  using Error::Error;
};
struct UnsupportedTheory : Error {
  using Error::Error;
};

}  // namespace tf
