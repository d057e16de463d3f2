#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "typeflaw/errors.hpp"

namespace tf {

struct TypeTag {
  enum class Kind : std::uint8_t { Agent, Nonce, Key, Number, AttackerName, Tag, Pair, Penc, Senc, HashT, SigT, XorT };
  Kind kind = Kind::Agent;
  std::vector<TypeTag> args;

  static TypeTag base(Kind k) { return TypeTag{k, {}}; }
  static TypeTag agent() { return base(Kind::Agent); }
  static TypeTag nonce() { return base(Kind::Nonce); }
  static TypeTag key() { return base(Kind::Key); }
  static TypeTag number() { return base(Kind::Number); }
  static TypeTag attacker() { return base(Kind::AttackerName); }
  static TypeTag tag() { return base(Kind::Tag); }
  static TypeTag pair(std::vector<TypeTag> ts) { return TypeTag{Kind::Pair, std::move(ts)}; }
  static TypeTag penc(TypeTag b, TypeTag k) { return TypeTag{Kind::Penc, {std::move(b), std::move(k)}}; }
  static TypeTag senc(TypeTag b, TypeTag k) { return TypeTag{Kind::Senc, {std::move(b), std::move(k)}}; }
  static TypeTag hash(TypeTag b) { return TypeTag{Kind::HashT, {std::move(b)}}; }
  static TypeTag sig(TypeTag b, TypeTag k) { return TypeTag{Kind::SigT, {std::move(b), std::move(k)}}; }
  // elements are sorted so that XorT behaves as a multiset
  static TypeTag xor_of(std::vector<TypeTag> ts);

  bool is_base() const { return args.empty() && kind != Kind::Pair && kind != Kind::XorT; }
};

int compare(const TypeTag& a, const TypeTag& b);
inline bool operator==(const TypeTag& a, const TypeTag& b) { return compare(a, b) == 0; }
inline bool operator!=(const TypeTag& a, const TypeTag& b) { return compare(a, b) != 0; }
inline bool operator<(const TypeTag& a, const TypeTag& b) { return compare(a, b) < 0; }

std::string to_string(const TypeTag& t);

// Declared type accepts actual type. The attacker name is an agent.
bool type_matches(const TypeTag& declared, const TypeTag& actual);

// Name used for the tag constant of a type, e.g. "nonce" for #nonce.
std::string tag_name(const TypeTag& t);

enum class Kind : std::uint8_t { Const, Atom, Var, Pk, Sh, Hash, Concat, Penc, Senc, Sig, Xor };

struct TermNode;

class Term {
 public:
  Term();  // the XOR unity 0
  explicit Term(std::shared_ptr<const TermNode> n) : n_(std::move(n)) {}

  Kind kind() const;
  const std::string& name() const;
  const TypeTag& declared_type() const;
  const std::vector<Term>& args() const;
  const Term& arg(std::size_t i) const { return args()[i]; }
  std::size_t hash() const;
  bool ground() const;
  bool has_xor() const;
  std::uint32_t size() const;
  std::uint32_t depth() const;

  bool is_var() const { return kind() == Kind::Var; }
  bool is_atom() const { return kind() == Kind::Atom; }
  bool is_const() const { return kind() == Kind::Const; }
  bool is_concat() const { return kind() == Kind::Concat; }
  bool is_xor() const { return kind() == Kind::Xor; }
  bool is_zero() const;
  bool is_attacker() const;
  bool is_tag() const;
  bool is_numeral() const;
  // encryption, hash or signature
  bool is_compound() const;

  const TermNode* node() const { return n_.get(); }

 private:
  std::shared_ptr<const TermNode> n_;
};

struct TermNode {
  Kind kind;
  std::string name;
  TypeTag type;
  std::vector<Term> args;
  std::size_t hash = 0;
  bool ground = true;
  bool has_xor = false;
  std::uint32_t size = 1;
  std::uint32_t depth = 1;
};

int compare(const Term& a, const Term& b);
bool operator==(const Term& a, const Term& b);
inline bool operator!=(const Term& a, const Term& b) { return !(a == b); }
inline bool operator<(const Term& a, const Term& b) { return compare(a, b) < 0; }

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

// The attacker's name, written `i`.
inline constexpr const char* kAttackerName = "i";

Term mk_var(const std::string& name, TypeTag type);
Term mk_atom(const std::string& name, TypeTag type);
Term mk_const(const std::string& name);
Term mk_num(int n);
Term mk_tag(const std::string& name);  // name without '#'
Term mk_zero();
Term mk_attacker();
Term mk_concat(std::vector<Term> elems);  // one element collapses to the element
Term mk_pk(const Term& a);
Term mk_sh(const Term& a, const Term& b, const std::string& label = "sh");
Term mk_penc(const Term& body, const Term& key);
Term mk_senc(const Term& body, const Term& key);
Term mk_hash(const Term& body);
Term mk_sig(const Term& body, const Term& key);
Term mk_xor(std::vector<Term> elems);      // normalized
Term mk_xor_raw(std::vector<Term> elems);  // as given, for tests of xor_normalize
// Rebuild t with new arguments; XOR nodes are normalized.
Term rebuild(const Term& t, std::vector<Term> args);

std::string to_string(const Term& t);

TypeTag type_of(const Term& t);
bool is_subterm(const Term& t, const Term& u);
// Subterms plus the key positions of encryptions and signatures.
bool is_subterm_or_key(const Term& t, const Term& u);
Term xor_normalize(const Term& t);
// Nested concatenations spliced into their parent (associative pairing).
Term flatten_concat(const Term& t);

std::vector<Term> xor_elements(const Term& t);  // elements if XOR, else {t} (empty for 0)
void collect_vars(const Term& t, std::map<std::string, Term>& out);
std::set<std::string> var_names(const Term& t);
bool occurs(const std::string& var, const Term& t);
// All subterms of t, including t itself; key positions only with with_keys.
void collect_subterms(const Term& t, std::set<Term>& out, bool with_keys = false);

class Substitution {
 public:
  Substitution() = default;

  // Adds x -> value. No resolution is performed; callers keep the map idempotent.
  void bind(const Term& var, const Term& value);
  bool binds(const std::string& name) const { return map_.count(name) != 0; }
  const Term* lookup(const std::string& name) const;
  std::size_t size() const { return map_.size(); }
  bool empty() const { return map_.empty(); }
  void erase(const std::string& name) { map_.erase(name); }

  struct Binding {
    Term var;
    Term value;
  };
  const std::map<std::string, Binding>& bindings() const { return map_; }

  bool is_idempotent() const;
  // Apply the map to its own range until it is idempotent. Throws Conflict on a cycle.
  void resolve();
  Substitution restricted(const std::set<std::string>& names) const;

  friend bool operator==(const Substitution& a, const Substitution& b);

 private:
  std::map<std::string, Binding> map_;
};

Term apply(const Substitution& s, const Term& t);
Substitution compose(const Substitution& first, const Substitution& then);
bool is_well_typed(const Substitution& s);
std::string to_string(const Substitution& s);
// Renames every variable of t whose name is in `names` by appending suffix.
Term rename_vars(const Term& t, const std::map<std::string, std::string>& renaming);

}  // namespace tf
