#include <cctype>

#include "typeflaw/parse.hpp"

namespace tf {

namespace {

bool is_delim(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '[' || c == ']' || c == ',' ||
         c == ';' || c == ':' || c == '{' || c == '}' || c == '=';
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

}  // namespace

Lexer::Lexer(std::string_view src, int line, int col) : src_(src), line_(line), col_(col) { advance(); }

Token Lexer::next() {
  Token t = cur_;
  advance();
  return t;
}

bool Lexer::accept(const std::string& punct) {
  if (cur_.type == Token::Type::Punct && cur_.text == punct) {
    advance();
    return true;
  }
  return false;
}

void Lexer::expect(const std::string& punct) {
  if (!accept(punct)) fail("expected '" + punct + "'");
}

void Lexer::fail(const std::string& msg) const {
  std::string near = cur_.type == Token::Type::End ? "end of input" : "'" + cur_.text + "'";
  throw SyntaxError(msg + " near " + near, cur_.line, cur_.col);
}

void Lexer::advance() {
  auto bump = [&] {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  };
  for (;;) {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) bump();
    if (pos_ + 1 < src_.size() && src_[pos_] == '-' && src_[pos_ + 1] == '-') {
      while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      continue;
    }
    break;
  }
  cur_ = Token{};
  cur_.line = line_;
  cur_.col = col_;
  if (pos_ >= src_.size()) {
    cur_.type = Token::Type::End;
    return;
  }
  char c = src_[pos_];
  std::size_t start = pos_;
  if (ident_start(c)) {
    while (pos_ < src_.size() && ident_char(src_[pos_])) bump();
    cur_.type = Token::Type::Ident;
  } else if (std::isdigit(static_cast<unsigned char>(c))) {
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
    cur_.type = Token::Type::Number;
  } else if (c == '#') {
    bump();
    while (pos_ < src_.size() && !is_delim(src_[pos_])) bump();
    if (pos_ - start == 1) throw SyntaxError("empty tag", cur_.line, cur_.col);
    cur_.type = Token::Type::Tag;
  } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
    bump();
    bump();
    cur_.type = Token::Type::Punct;
  } else if (std::string_view("()[],;:{}=").find(c) != std::string_view::npos) {
    bump();
    cur_.type = Token::Type::Punct;
  } else {
    throw SyntaxError(std::string("unexpected character '") + c + "'", cur_.line, cur_.col);
  }
  cur_.text = std::string(src_.substr(start, pos_ - start));
}

TypeTag infer_var_type(const std::string& name) {
  if (!name.empty() && name[0] == 'N') return TypeTag::nonce();
  if (!name.empty() && name[0] == 'K') return TypeTag::key();
  return TypeTag::agent();
}

TypeTag infer_atom_type(const std::string& name) {
  if (!name.empty() && name[0] == 'n') return TypeTag::nonce();
  if (!name.empty() && name[0] == 'k') return TypeTag::key();
  return TypeTag::agent();
}

namespace {

std::vector<Term> term_list(Lexer& lx, const Symbols& syms, const std::string& close) {
  std::vector<Term> out;
  out.push_back(parse_term(lx, syms));
  while (lx.accept(",")) out.push_back(parse_term(lx, syms));
  lx.expect(close);
  return out;
}

std::pair<Term, Term> body_key(Lexer& lx, const Symbols& syms) {
  Term b = parse_term(lx, syms);
  lx.expect(";");
  Term k = parse_term(lx, syms);
  lx.expect(")");
  return {b, k};
}

}  // namespace

Term parse_term(Lexer& lx, const Symbols& syms) {
  Token t = lx.peek();
  switch (t.type) {
    case Token::Type::Number:
      lx.next();
      return mk_const(std::to_string(std::stoi(t.text)));
    case Token::Type::Tag:
      lx.next();
      return mk_const(t.text);
    case Token::Type::Punct:
      if (t.text == "[") {
        lx.next();
        auto elems = term_list(lx, syms, "]");
        if (elems.size() < 2) throw SyntaxError("concatenation needs at least two elements", t.line, t.col);
        return mk_concat(std::move(elems));
      }
      lx.fail("expected a term");
    case Token::Type::End: lx.fail("expected a term");
    case Token::Type::Ident: break;
  }
  lx.next();
  const std::string& id = t.text;
  if (lx.accept("(")) {
    if (id == "pk") {
      auto a = term_list(lx, syms, ")");
      if (a.size() != 1) throw SyntaxError("pk takes one argument", t.line, t.col);
      return mk_pk(a[0]);
    }
    if (id == "sh" || id == "passwd") {
      auto a = term_list(lx, syms, ")");
      if (a.size() != 2) throw SyntaxError(id + " takes two arguments", t.line, t.col);
      return mk_sh(a[0], a[1], id);
    }
    if (id == "h") {
      auto a = term_list(lx, syms, ")");
      return mk_hash(a.size() == 1 ? a[0] : mk_concat(a));
    }
    if (id == "xor") return mk_xor(term_list(lx, syms, ")"));
    if (id == "penc") {
      auto [b, k] = body_key(lx, syms);
      return mk_penc(b, k);
    }
    if (id == "senc") {
      auto [b, k] = body_key(lx, syms);
      return mk_senc(b, k);
    }
    if (id == "sig") {
      auto [b, k] = body_key(lx, syms);
      return mk_sig(b, k);
    }
    throw SyntaxError("unknown function '" + id + "'", t.line, t.col);
  }
  if (id == kAttackerName) return mk_attacker();
  bool upper = std::isupper(static_cast<unsigned char>(id[0])) || id[0] == '_';
  if (upper) {
    auto it = syms.vars.find(id);
    if (it != syms.vars.end()) return mk_var(id, it->second);
    if (syms.infer_undeclared) return mk_var(id, infer_var_type(id));
    throw UndeclaredIdentifier("undeclared variable '" + id + "' at " + std::to_string(t.line) + ":" +
                               std::to_string(t.col));
  }
  auto it = syms.atoms.find(id);
  if (it != syms.atoms.end()) return mk_atom(id, it->second);
  if (syms.infer_undeclared) return mk_atom(id, infer_atom_type(id));
  throw UndeclaredIdentifier("undeclared atom '" + id + "' at " + std::to_string(t.line) + ":" +
                             std::to_string(t.col));
}

Term parse_term(std::string_view text, const Symbols& syms) {
  Lexer lx(text);
  Term t = parse_term(lx, syms);
  if (!lx.at_end()) lx.fail("trailing input");
  return t;
}

Term parse_term(std::string_view text) {
  Symbols s;
  s.infer_undeclared = true;
  return parse_term(text, s);
}

TypeTag parse_type(Lexer& lx) {
  Token t = lx.next();
  if (t.type == Token::Type::Punct && t.text == "[") {
    std::vector<TypeTag> ts{parse_type(lx)};
    while (lx.accept(",")) ts.push_back(parse_type(lx));
    lx.expect("]");
    return TypeTag::pair(std::move(ts));
  }
  if (t.type != Token::Type::Ident) throw SyntaxError("expected a type", t.line, t.col);
  static const std::map<std::string, TypeTag::Kind> base = {
      {"Agent", TypeTag::Kind::Agent}, {"Nonce", TypeTag::Kind::Nonce},
      {"Key", TypeTag::Kind::Key},     {"Number", TypeTag::Kind::Number},
      {"Tag", TypeTag::Kind::Tag},     {"AttackerName", TypeTag::Kind::AttackerName}};
  if (auto it = base.find(t.text); it != base.end()) return TypeTag::base(it->second);
  lx.expect("(");
  auto two = [&](TypeTag::Kind k) {
    TypeTag b = parse_type(lx);
    lx.expect(";");
    TypeTag key = parse_type(lx);
    lx.expect(")");
    return TypeTag{k, {b, key}};
  };
  if (t.text == "penc") return two(TypeTag::Kind::Penc);
  if (t.text == "senc") return two(TypeTag::Kind::Senc);
  if (t.text == "sig") return two(TypeTag::Kind::SigT);
  if (t.text == "h") {
    TypeTag b = parse_type(lx);
    lx.expect(")");
    return TypeTag::hash(b);
  }
  if (t.text == "xor") {
    std::vector<TypeTag> ts{parse_type(lx)};
    while (lx.accept(",")) ts.push_back(parse_type(lx));
    lx.expect(")");
    return TypeTag::xor_of(std::move(ts));
  }
  throw SyntaxError("unknown type '" + t.text + "'", t.line, t.col);
}

TypeTag parse_type(std::string_view text) {
  Lexer lx(text);
  TypeTag t = parse_type(lx);
  if (!lx.at_end()) lx.fail("trailing input");
  return t;
}

}  // namespace tf
