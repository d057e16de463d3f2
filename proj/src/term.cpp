#include "typeflaw/term.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace tf {

namespace {

std::size_t fnv(const std::string& s, std::size_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::size_t mix(std::size_t h, std::size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

const char* base_type_name(TypeTag::Kind k) {
  switch (k) {
    case TypeTag::Kind::Agent: return "Agent";
    case TypeTag::Kind::Nonce: return "Nonce";
    case TypeTag::Kind::Key: return "Key";
    case TypeTag::Kind::Number: return "Number";
    case TypeTag::Kind::AttackerName: return "AttackerName";
    case TypeTag::Kind::Tag: return "Tag";
    default: return "?";
  }
}

Term make(Kind k, std::string name, TypeTag type, std::vector<Term> args) {
  auto n = std::make_shared<TermNode>();
  n->kind = k;
  n->name = std::move(name);
  n->type = std::move(type);
  n->args = std::move(args);
  std::size_t h = mix(fnv(n->name), static_cast<std::size_t>(k) * 7919);
  n->ground = (k != Kind::Var);
  n->has_xor = (k == Kind::Xor);
  std::uint32_t sz = 1, dp = 0;
  for (const Term& a : n->args) {
    h = mix(h, a.hash());
    n->ground = n->ground && a.ground();
    n->has_xor = n->has_xor || a.has_xor();
    sz += a.size();
    dp = std::max(dp, a.depth());
  }
  n->hash = h;
  n->size = sz;
  n->depth = dp + 1;
  return Term(std::move(n));
}

const Term& zero_term() {
  static const Term z = make(Kind::Const, "0", TypeTag{}, {});
  return z;
}

}  // namespace

TypeTag TypeTag::xor_of(std::vector<TypeTag> ts) {
  std::sort(ts.begin(), ts.end());
  return TypeTag{Kind::XorT, std::move(ts)};
}

int compare(const TypeTag& a, const TypeTag& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    int c = compare(a.args[i], b.args[i]);
    if (c) return c;
  }
  return 0;
}

std::string to_string(const TypeTag& t) {
  auto list = [](const std::vector<TypeTag>& ts, const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (i) s += sep;
      s += to_string(ts[i]);
    }
    return s;
  };
  switch (t.kind) {
    case TypeTag::Kind::Pair: return "[" + list(t.args, ",") + "]";
    case TypeTag::Kind::Penc: return "penc(" + to_string(t.args[0]) + ";" + to_string(t.args[1]) + ")";
    case TypeTag::Kind::Senc: return "senc(" + to_string(t.args[0]) + ";" + to_string(t.args[1]) + ")";
    case TypeTag::Kind::HashT: return "h(" + to_string(t.args[0]) + ")";
    case TypeTag::Kind::SigT: return "sig(" + to_string(t.args[0]) + ";" + to_string(t.args[1]) + ")";
    case TypeTag::Kind::XorT: return "xor(" + list(t.args, ",") + ")";
    default: return base_type_name(t.kind);
  }
}

bool type_matches(const TypeTag& declared, const TypeTag& actual) {
  if (declared.kind == TypeTag::Kind::Agent && actual.kind == TypeTag::Kind::AttackerName) return true;
  if (declared.kind != actual.kind || declared.args.size() != actual.args.size()) return false;
  for (std::size_t i = 0; i < declared.args.size(); ++i)
    if (!type_matches(declared.args[i], actual.args[i])) return false;
  return true;
}

std::string tag_name(const TypeTag& t) {
  switch (t.kind) {
    case TypeTag::Kind::Agent:
    case TypeTag::Kind::AttackerName: return "agent";
    case TypeTag::Kind::Nonce: return "nonce";
    case TypeTag::Kind::Key: return "key";
    case TypeTag::Kind::Number: return "number";
    case TypeTag::Kind::Tag: return "tag";
    case TypeTag::Kind::Pair: return "pair";
    case TypeTag::Kind::Penc: return "penc";
    case TypeTag::Kind::Senc: return "senc";
    case TypeTag::Kind::HashT: return "hash";
    case TypeTag::Kind::SigT: return "sig";
    case TypeTag::Kind::XorT: {
      if (t.args.empty()) return "zero";
      std::string s;
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        if (i) s += "⊕";
        s += tag_name(t.args[i]);
      }
      return s;
    }
  }
  return "?";
}

Term::Term() : n_(zero_term().n_) {}

Kind Term::kind() const { return n_->kind; }
const std::string& Term::name() const { return n_->name; }
const TypeTag& Term::declared_type() const { return n_->type; }
const std::vector<Term>& Term::args() const { return n_->args; }
std::size_t Term::hash() const { return n_->hash; }
bool Term::ground() const { return n_->ground; }
bool Term::has_xor() const { return n_->has_xor; }
std::uint32_t Term::size() const { return n_->size; }
std::uint32_t Term::depth() const { return n_->depth; }
bool Term::is_zero() const { return kind() == Kind::Const && name() == "0"; }
bool Term::is_attacker() const { return kind() == Kind::Const && name() == kAttackerName; }
bool Term::is_tag() const { return kind() == Kind::Const && !name().empty() && name()[0] == '#'; }
bool Term::is_numeral() const {
  return kind() == Kind::Const && !name().empty() && std::isdigit(static_cast<unsigned char>(name()[0])) && name() != "0";
}
bool Term::is_compound() const {
  Kind k = kind();
  return k == Kind::Penc || k == Kind::Senc || k == Kind::Hash || k == Kind::Sig;
}

int compare(const Term& a, const Term& b) {
  if (a.node() == b.node()) return 0;
  if (a.kind() != b.kind()) return a.kind() < b.kind() ? -1 : 1;
  if (a.name() != b.name()) return a.name() < b.name() ? -1 : 1;
  if (a.kind() == Kind::Var || a.kind() == Kind::Atom) {
    int c = compare(a.declared_type(), b.declared_type());
    if (c) return c;
  }
  const auto& x = a.args();
  const auto& y = b.args();
  if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    int c = compare(x[i], y[i]);
    if (c) return c;
  }
  return 0;
}

bool operator==(const Term& a, const Term& b) {
  if (a.node() == b.node()) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

Term mk_var(const std::string& name, TypeTag type) { return make(Kind::Var, name, std::move(type), {}); }
Term mk_atom(const std::string& name, TypeTag type) { return make(Kind::Atom, name, std::move(type), {}); }
Term mk_const(const std::string& name) {
  if (name == "0") return zero_term();
  return make(Kind::Const, name, TypeTag{}, {});
}
Term mk_num(int n) { return mk_const(std::to_string(n)); }
Term mk_tag(const std::string& name) { return mk_const("#" + name); }
Term mk_zero() { return zero_term(); }
Term mk_attacker() { return mk_const(kAttackerName); }

Term mk_concat(std::vector<Term> elems) {
  if (elems.empty()) throw Error("empty concatenation");
  if (elems.size() == 1) return elems[0];
  return make(Kind::Concat, "", TypeTag{}, std::move(elems));
}
Term mk_pk(const Term& a) { return make(Kind::Pk, "pk", TypeTag{}, {a}); }
Term mk_sh(const Term& a, const Term& b, const std::string& label) { return make(Kind::Sh, label, TypeTag{}, {a, b}); }
Term mk_penc(const Term& body, const Term& key) { return make(Kind::Penc, "", TypeTag{}, {body, key}); }
Term mk_senc(const Term& body, const Term& key) { return make(Kind::Senc, "", TypeTag{}, {body, key}); }
Term mk_hash(const Term& body) { return make(Kind::Hash, "", TypeTag{}, {body}); }
Term mk_sig(const Term& body, const Term& key) { return make(Kind::Sig, "", TypeTag{}, {body, key}); }
Term mk_xor_raw(std::vector<Term> elems) { return make(Kind::Xor, "", TypeTag{}, std::move(elems)); }

Term mk_xor(std::vector<Term> elems) {
  std::vector<Term> flat;
  flat.reserve(elems.size());
  std::function<void(const Term&)> add = [&](const Term& e) {
    if (e.is_xor()) {
      for (const Term& x : e.args()) add(x);
    } else if (!e.is_zero()) {
      flat.push_back(e);
    }
  };
  for (const Term& e : elems) add(e);
  std::sort(flat.begin(), flat.end());
  std::vector<Term> out;
  for (std::size_t i = 0; i < flat.size();) {
    std::size_t j = i;
    while (j < flat.size() && flat[j] == flat[i]) ++j;
    if ((j - i) % 2 == 1) out.push_back(flat[i]);
    i = j;
  }
  if (out.empty()) return mk_zero();
  if (out.size() == 1) return out[0];
  return mk_xor_raw(std::move(out));
}

Term rebuild(const Term& t, std::vector<Term> args) {
  switch (t.kind()) {
    case Kind::Xor: return mk_xor(std::move(args));
    case Kind::Concat: return mk_concat(std::move(args));
    default: return make(t.kind(), t.name(), t.declared_type(), std::move(args));
  }
}

std::string to_string(const Term& t) {
  auto list = [](const std::vector<Term>& ts) {
    std::string s;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      if (i) s += ",";
      s += to_string(ts[i]);
    }
    return s;
  };
  switch (t.kind()) {
    case Kind::Const:
    case Kind::Atom:
    case Kind::Var: return t.name();
    case Kind::Pk: return "pk(" + to_string(t.arg(0)) + ")";
    case Kind::Sh: return t.name() + "(" + to_string(t.arg(0)) + "," + to_string(t.arg(1)) + ")";
    case Kind::Hash: return "h(" + to_string(t.arg(0)) + ")";
    case Kind::Concat: return "[" + list(t.args()) + "]";
    case Kind::Penc: return "penc(" + to_string(t.arg(0)) + ";" + to_string(t.arg(1)) + ")";
    case Kind::Senc: return "senc(" + to_string(t.arg(0)) + ";" + to_string(t.arg(1)) + ")";
    case Kind::Sig: return "sig(" + to_string(t.arg(0)) + ";" + to_string(t.arg(1)) + ")";
    case Kind::Xor: return "xor(" + list(t.args()) + ")";
  }
  return "?";
}

TypeTag type_of(const Term& t) {
  switch (t.kind()) {
    case Kind::Var:
    case Kind::Atom: return t.declared_type();
    case Kind::Const:
      if (t.is_zero()) return TypeTag::xor_of({});
      if (t.is_attacker()) return TypeTag::attacker();
      if (t.is_tag()) return TypeTag::tag();
      return TypeTag::number();
    case Kind::Pk:
    case Kind::Sh: return TypeTag::key();
    case Kind::Hash: return TypeTag::hash(type_of(t.arg(0)));
    case Kind::Concat: {
      std::vector<TypeTag> ts;
      for (const Term& a : t.args()) ts.push_back(type_of(a));
      return TypeTag::pair(std::move(ts));
    }
    case Kind::Penc: return TypeTag::penc(type_of(t.arg(0)), type_of(t.arg(1)));
    case Kind::Senc: return TypeTag::senc(type_of(t.arg(0)), type_of(t.arg(1)));
    case Kind::Sig: return TypeTag::sig(type_of(t.arg(0)), type_of(t.arg(1)));
    case Kind::Xor: {
      std::vector<TypeTag> ts;
      for (const Term& a : t.args()) ts.push_back(type_of(a));
      return TypeTag::xor_of(std::move(ts));
    }
  }
  return TypeTag{};
}

namespace {

bool subterm_impl(const Term& t, const Term& u, bool with_keys) {
  if (t == u) return true;
  if (t.size() >= u.size()) return false;
  switch (u.kind()) {
    case Kind::Concat:
    case Kind::Xor:
      for (const Term& e : u.args())
        if (subterm_impl(t, e, with_keys)) return true;
      return false;
    case Kind::Penc:
    case Kind::Senc:
    case Kind::Sig:
      return subterm_impl(t, u.arg(0), with_keys) || (with_keys && subterm_impl(t, u.arg(1), with_keys));
    case Kind::Hash: return subterm_impl(t, u.arg(0), with_keys);
    default: return false;
  }
}

}  // namespace

bool is_subterm(const Term& t, const Term& u) { return subterm_impl(t, u, false); }
bool is_subterm_or_key(const Term& t, const Term& u) { return subterm_impl(t, u, true); }

void collect_subterms(const Term& t, std::set<Term>& out, bool with_keys) {
  if (!out.insert(t).second) return;
  switch (t.kind()) {
    case Kind::Concat:
    case Kind::Xor:
      for (const Term& e : t.args()) collect_subterms(e, out, with_keys);
      break;
    case Kind::Penc:
    case Kind::Senc:
    case Kind::Sig:
      collect_subterms(t.arg(0), out, with_keys);
      if (with_keys) collect_subterms(t.arg(1), out, with_keys);
      break;
    case Kind::Hash: collect_subterms(t.arg(0), out, with_keys); break;
    default: break;
  }
}

Term xor_normalize(const Term& t) {
  if (t.args().empty()) return t;
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const Term& a : t.args()) args.push_back(xor_normalize(a));
  if (t.is_xor()) return mk_xor(std::move(args));
  return rebuild(t, std::move(args));
}

Term flatten_concat(const Term& t) {
  if (t.args().empty()) return t;
  std::vector<Term> args;
  for (const Term& a : t.args()) {
    Term f = flatten_concat(a);
    if (t.is_concat() && f.is_concat()) {
      for (const Term& x : f.args()) args.push_back(x);
    } else {
      args.push_back(f);
    }
  }
  return rebuild(t, std::move(args));
}

std::vector<Term> xor_elements(const Term& t) {
  if (t.is_xor()) return t.args();
  if (t.is_zero()) return {};
  return {t};
}

void collect_vars(const Term& t, std::map<std::string, Term>& out) {
  if (t.ground()) return;
  if (t.is_var()) {
    out.emplace(t.name(), t);
    return;
  }
  for (const Term& a : t.args()) collect_vars(a, out);
}

std::set<std::string> var_names(const Term& t) {
  std::map<std::string, Term> m;
  collect_vars(t, m);
  std::set<std::string> s;
  for (auto& [k, v] : m) s.insert(k);
  return s;
}

bool occurs(const std::string& var, const Term& t) {
  if (t.ground()) return false;
  if (t.is_var()) return t.name() == var;
  for (const Term& a : t.args())
    if (occurs(var, a)) return true;
  return false;
}

void Substitution::bind(const Term& var, const Term& value) {
  if (!var.is_var()) throw Error("binding a non-variable: " + to_string(var));
  if (value.is_var() && value.name() == var.name()) {
    map_.erase(var.name());
    return;
  }
  map_[var.name()] = Binding{var, value};
}

const Term* Substitution::lookup(const std::string& name) const {
  auto it = map_.find(name);
  return it == map_.end() ? nullptr : &it->second.value;
}

bool Substitution::is_idempotent() const {
  for (const auto& [k, b] : map_) {
    if (b.value.ground()) continue;
    for (const auto& v : var_names(b.value))
      if (map_.count(v)) return false;
  }
  return true;
}

void Substitution::resolve() {
  for (std::size_t round = 0; !is_idempotent(); ++round) {
    if (round > map_.size() + 1) throw Conflict("cyclic substitution");
    std::map<std::string, Binding> next;
    for (const auto& [k, b] : map_) {
      Term v = apply(*this, b.value);
      if (occurs(k, v)) {
        if (v.is_var()) continue;
        throw Conflict("occurs check on " + k);
      }
      next[k] = Binding{b.var, v};
    }
    map_ = std::move(next);
  }
}

Substitution Substitution::restricted(const std::set<std::string>& names) const {
  Substitution r;
  for (const auto& [k, b] : map_)
    if (names.count(k)) r.map_.emplace(k, b);
  return r;
}

bool operator==(const Substitution& a, const Substitution& b) {
  if (a.map_.size() != b.map_.size()) return false;
  auto it = b.map_.begin();
  for (const auto& [k, v] : a.map_) {
    if (k != it->first || v.value != it->second.value) return false;
    ++it;
  }
  return true;
}

Term apply(const Substitution& s, const Term& t) {
  if (t.ground() || s.empty()) return t;
  if (t.is_var()) {
    const Term* v = s.lookup(t.name());
    return v ? *v : t;
  }
  std::vector<Term> args;
  args.reserve(t.args().size());
  bool changed = false;
  for (const Term& a : t.args()) {
    args.push_back(apply(s, a));
    changed = changed || args.back().node() != a.node();
  }
  if (!changed) return t;
  return rebuild(t, std::move(args));
}

Substitution compose(const Substitution& first, const Substitution& then) {
  Substitution r;
  for (const auto& [k, b] : first.bindings()) r.bind(b.var, apply(then, b.value));
  for (const auto& [k, b] : then.bindings())
    if (!first.binds(k)) r.bind(b.var, b.value);
  if (!r.is_idempotent()) r.resolve();
  return r;
}

bool is_well_typed(const Substitution& s) {
  for (const auto& [k, b] : s.bindings())
    if (!type_matches(b.var.declared_type(), type_of(b.value))) return false;
  return true;
}

std::string to_string(const Substitution& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, b] : s.bindings()) {
    if (!first) out += ", ";
    first = false;
    out += to_string(b.value) + "/" + k;
  }
  return out + "}";
}

Term rename_vars(const Term& t, const std::map<std::string, std::string>& renaming) {
  if (t.ground()) return t;
  if (t.is_var()) {
    auto it = renaming.find(t.name());
    return it == renaming.end() ? t : mk_var(it->second, t.declared_type());
  }
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(rename_vars(a, renaming));
  return rebuild(t, std::move(args));
}

}  // namespace tf
