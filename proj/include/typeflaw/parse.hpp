#pragma once

#include <map>
#include <string>
#include <string_view>

#include "typeflaw/term.hpp"

namespace tf {

struct Token {
  enum class Type { Ident, Number, Tag, Punct, End };
  Type type = Type::End;
  std::string text;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src, int line = 1, int col = 1);
  const Token& peek() const { return cur_; }
  Token next();
  bool at_end() const { return cur_.type == Token::Type::End; }
  bool accept(const std::string& punct);
  void expect(const std::string& punct);
  [[noreturn]] void fail(const std::string& msg) const;

 private:
  void advance();
  std::string_view src_;
  std::size_t pos_ = 0;
  int line_, col_;
  Token cur_;
};

struct Symbols {
  std::map<std::string, TypeTag> vars;
  std::map<std::string, TypeTag> atoms;
  // Undeclared identifiers get a type from their spelling (N.. nonce, K.. key, else agent).
  bool infer_undeclared = false;
};

TypeTag infer_var_type(const std::string& name);
TypeTag infer_atom_type(const std::string& name);

Term parse_term(Lexer& lx, const Symbols& syms);
Term parse_term(std::string_view text, const Symbols& syms);
// Parses with naming-convention types for every identifier.
Term parse_term(std::string_view text);
TypeTag parse_type(Lexer& lx);
TypeTag parse_type(std::string_view text);

}  // namespace tf
