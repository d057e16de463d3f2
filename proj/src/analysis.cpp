#include <algorithm>
#include <functional>

#include "typeflaw/acun.hpp"
#include "typeflaw/analysis.hpp"

namespace tf {

namespace {

void collect_compound(const Term& t, std::vector<Term>& out) {
  if (t.is_compound() && std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  for (const Term& a : t.args()) collect_compound(a, out);
}

Term suffixed(const Term& t, const std::string& suffix) {
  std::map<std::string, std::string> ren;
  for (const auto& v : var_names(t)) ren[v] = v + suffix;
  return rename_vars(t, ren);
}

bool unifiable(const Term& a, const Term& b) {
  if (a.has_xor() || b.has_xor()) return !mgu_combined(a, b).empty();
  return mgu_syntactic(a, b).has_value();
}

// specific = rho(general) for a well-typed rho
bool well_typed_instance(const Term& specific, const Term& general) {
  std::map<std::string, Term> rho;
  if (!match(general, specific, rho)) return false;
  std::map<std::string, Term> vars;
  collect_vars(general, vars);
  for (const auto& [k, v] : rho)
    if (!type_matches(vars.at(k).declared_type(), type_of(v))) return false;
  return true;
}

bool is_variant(const Term& a, const Term& b) { return well_typed_instance(a, b) && well_typed_instance(b, a); }

}  // namespace

std::vector<Term> compound_terms(const Protocol& P) {
  std::vector<Term> out;
  for (const auto& r : P.roles)
    for (const auto& n : r.nodes) collect_compound(n.term, out);
  return out;
}

bool is_tagged(const Term& t) {
  if (!t.is_concat() || t.args().size() != 2 || !t.arg(0).is_tag()) return false;
  return t.arg(0).name() == "#" + tag_name(type_of(t.arg(1)));
}

NutReport check_nut(const Protocol& P) {
  NutReport rep;
  std::vector<Term> ct = compound_terms(P);
  for (std::size_t i = 0; i < ct.size(); ++i)
    for (std::size_t j = i + 1; j < ct.size(); ++j) {
      const Term &t1 = ct[i], &t2 = ct[j];
      // the same message seen by different roles, or an opaque view of a message
      if (is_variant(t1, t2) || well_typed_instance(t1, t2) || well_typed_instance(t2, t1)) continue;
      if (unifiable(suffixed(t1, "_1"), suffixed(t2, "_2")))
        rep.violations.push_back({NutClause::PairwiseUnifiable,
                                  {t1, t2},
                                  "clause 1: " + to_string(t1) + " unifies with " + to_string(t2)});
    }
  std::vector<Term> xors;
  std::function<void(const Term&)> scan = [&](const Term& t) {
    if (t.is_xor() && std::find(xors.begin(), xors.end(), t) == xors.end()) xors.push_back(t);
    for (const Term& a : t.args()) scan(a);
  };
  for (const auto& r : P.roles)
    for (const auto& n : r.nodes) scan(n.term);
  for (const Term& x : xors)
    for (const Term& e : x.args())
      if (!is_tagged(e))
        rep.violations.push_back({NutClause::UntaggedXorElement,
                                  {e, x},
                                  "clause 2: element " + to_string(e) + " of " + to_string(x) + " is not type-tagged"});
  rep.satisfied = rep.violations.empty();
  return rep;
}

namespace {

// Skeleton of a type with fresh variables at the leaves, numerals for Number.
Term skeleton(const TypeTag& t, int& fresh) {
  switch (t.kind) {
    case TypeTag::Kind::Number: return mk_num(1);
    case TypeTag::Kind::Pair: {
      // the type of a tagged field: the tag is the constant naming the payload type
      if (t.args.size() == 2 && t.args[0].kind == TypeTag::Kind::Tag)
        return mk_concat({mk_tag(tag_name(t.args[1])), skeleton(t.args[1], fresh)});
      std::vector<Term> es;
      for (const auto& a : t.args) es.push_back(skeleton(a, fresh));
      return mk_concat(std::move(es));
    }
    case TypeTag::Kind::Penc: return mk_penc(skeleton(t.args[0], fresh), skeleton(t.args[1], fresh));
    case TypeTag::Kind::Senc: return mk_senc(skeleton(t.args[0], fresh), skeleton(t.args[1], fresh));
    case TypeTag::Kind::SigT: return mk_sig(skeleton(t.args[0], fresh), skeleton(t.args[1], fresh));
    case TypeTag::Kind::HashT: return mk_hash(skeleton(t.args[0], fresh));
    case TypeTag::Kind::XorT: {
      std::vector<Term> es;
      for (const auto& a : t.args) es.push_back(skeleton(a, fresh));
      return mk_xor_raw(std::move(es));
    }
    default: return mk_var("_S" + std::to_string(fresh++), t);
  }
}

Term retype(const Term& t, const std::map<std::string, TypeTag>& types) {
  if (t.is_var()) {
    auto it = types.find(t.name());
    return it == types.end() ? t : mk_var(t.name(), it->second);
  }
  if (t.args().empty()) return t;
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(retype(a, types));
  return rebuild(t, std::move(args));
}

// Applies f to every message and re-derives the types of the variables through skeletons.
Protocol transform(const Protocol& P, const std::function<Term(const Term&)>& f) {
  Protocol out = P;
  std::map<std::string, TypeTag> types;
  std::map<std::string, Term> vars;
  for (const auto& r : P.roles)
    for (const auto& n : r.nodes) collect_vars(n.term, vars);
  for (auto& r : out.roles)
    for (auto& n : r.nodes) n.term = f(n.term);
  for (const auto& [name, v] : vars) {
    const TypeTag& ty = v.declared_type();
    if (ty.is_base()) continue;
    int fresh = 0;
    types[name] = type_of(f(skeleton(ty, fresh)));
  }
  for (auto& r : out.roles)
    for (auto& n : r.nodes) n.term = retype(n.term, types);
  for (const auto& [name, ty] : types) out.var_types[name] = ty;
  return out;
}

}  // namespace

Protocol tag_component_numbers(const Protocol& P) {
  int next = 0;
  std::function<void(const Term&)> scan = [&](const Term& t) {
    if (t.is_numeral()) next = std::max(next, std::stoi(t.name()));
    for (const Term& a : t.args()) scan(a);
  };
  for (const auto& r : P.roles)
    for (const auto& n : r.nodes) scan(n.term);
  ++next;
  std::vector<std::pair<Term, int>> numbers;
  auto number_of = [&](const Term& t) {
    for (const auto& [u, k] : numbers)
      if (u == t) return k;
    numbers.emplace_back(t, next);
    return next++;
  };
  std::function<Term(const Term&)> f = [&](const Term& t) -> Term {
    if (t.args().empty()) return t;
    if (t.is_compound()) {
      const Term& body = t.arg(0);
      bool numbered = body.is_concat() && body.arg(0).is_numeral();
      std::vector<Term> es;
      if (!numbered) es.push_back(mk_num(number_of(t)));
      if (body.is_concat())
        for (const Term& e : body.args()) es.push_back(f(e));
      else
        es.push_back(f(body));
      std::vector<Term> args = t.args();
      args[0] = mk_concat(std::move(es));
      for (std::size_t i = 1; i < args.size(); ++i) args[i] = f(args[i]);
      return rebuild(t, std::move(args));
    }
    std::vector<Term> args;
    for (const Term& a : t.args()) args.push_back(f(a));
    return rebuild(t, std::move(args));
  };
  return transform(P, f);
}

namespace {

Term tag_of(const Term& t) { return mk_tag(tag_name(type_of(t))); }

struct TypeTagger {
  bool detailed_xor;
  bool full;

  Term wrap(const Term& e) const {
    if (is_tagged(e)) return mk_concat({e.arg(0), payload(e.arg(1))});
    Term p = payload(e);
    return mk_concat({tag_of(p), p});
  }

  Term field(const Term& e) const { return full ? wrap(e) : payload(e); }

  Term body(const Term& b) const {
    if (!full) return payload(b);
    if (b.is_concat() && !is_tagged(b)) {
      std::vector<Term> es;
      for (const Term& e : b.args()) es.push_back(wrap(e));
      return mk_concat(std::move(es));
    }
    return wrap(b);
  }

  Term payload(const Term& t) const {
    switch (t.kind()) {
      case Kind::Concat: {
        std::vector<Term> es;
        for (const Term& e : t.args()) es.push_back(field(e));
        return mk_concat(std::move(es));
      }
      case Kind::Penc:
      case Kind::Senc:
      case Kind::Sig: {
        std::vector<Term> args = t.args();
        args[0] = body(args[0]);
        return rebuild(t, std::move(args));
      }
      case Kind::Hash: return mk_hash(body(t.arg(0)));
      case Kind::Xor: {
        std::vector<Term> es;
        for (const Term& e : t.args()) es.push_back(detailed_xor || full ? wrap(e) : payload(e));
        return mk_xor(std::move(es));
      }
      default: return t;
    }
  }

  Term message(const Term& t) const {
    if (!full || t.is_compound()) return payload(t);
    return wrap(t);
  }
};

}  // namespace

Protocol tag_types(const Protocol& P, bool detailed_xor, bool full) {
  TypeTagger tagger{detailed_xor, full};
  return transform(P, [&](const Term& t) { return tagger.message(t); });
}

std::string to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::TypeFlawAttack: return "TypeFlawAttack";
    case VerdictKind::NoAttackWithinBounds: return "NoAttackWithinBounds";
    case VerdictKind::WellTypedAttackExists: return "WellTypedAttackExists";
  }
  return "?";
}

namespace {

void add_stats(SolveStats& into, const SolveStats& s) {
  into.states += s.states;
  into.memo_hits += s.memo_hits;
  into.unifiers += s.unifiers;
  into.ill_typed_unifiers += s.ill_typed_unifiers;
  into.subterm_violations += s.subterm_violations;
  into.weakness_steps += s.weakness_steps;
  into.exhausted = into.exhausted && s.exhausted;
}

AttackVerdict attack(VerdictKind kind, const Solution& sol, const ConstraintSequence& C) {
  AttackVerdict v;
  v.kind = kind;
  v.sigma = sol.sigma;
  v.trace = sol.trace;
  v.sequence = C;
  return v;
}

}  // namespace

AttackVerdict find_typeflaw(const SemiBundle& S, const AnalysisConfig& cfg) {
  AttackVerdict v;
  SolveOptions opt;
  opt.rules = cfg.rules;
  opt.rules.assoc_pairs = opt.rules.assoc_pairs || S.assoc_pairs;
  opt.limits = cfg.limits;
  opt.weak_keys = S.weak_keys;
  opt.check_subterms = cfg.check_subterms;
  opt.stop = [](const Solution&) { return true; };

  std::optional<AttackVerdict> well_typed;
  bool exhausted = true;
  for (const auto& C : constraint_sequences(S, cfg.reduced_interleavings)) {
    // nothing to reach: no strand receives and no goal is set
    if (C.constraints.empty()) continue;
    ++v.sequences;
    SolveResult first = solve(C, opt);
    add_stats(v.stats, first.stats);
    v.subterm_witnesses.insert(v.subterm_witnesses.end(), first.subterm_witnesses.begin(),
                               first.subterm_witnesses.end());
    if (first.solutions.empty()) {
      exhausted = exhausted && first.stats.exhausted;
      continue;
    }
    const Solution& sol = first.solutions.front();
    if (is_well_typed(sol.sigma)) {
      if (!well_typed) well_typed = attack(VerdictKind::WellTypedAttackExists, sol, C);
      continue;
    }
    SolveOptions wt = opt;
    wt.well_typed_only = true;
    SolveResult second = solve(C, wt);
    add_stats(v.stats, second.stats);
    if (!second.solutions.empty()) {
      if (!well_typed) well_typed = attack(VerdictKind::WellTypedAttackExists, second.solutions.front(), C);
      continue;
    }
    if (!second.stats.exhausted) {
      exhausted = false;
      continue;
    }
    AttackVerdict out = attack(VerdictKind::TypeFlawAttack, sol, C);
    out.sequences = v.sequences;
    out.stats = v.stats;
    out.subterm_witnesses = v.subterm_witnesses;
    return out;
  }
  if (well_typed) {
    well_typed->sequences = v.sequences;
    well_typed->stats = v.stats;
    well_typed->subterm_witnesses = v.subterm_witnesses;
    well_typed->exhausted = exhausted;
    return *well_typed;
  }
  v.kind = VerdictKind::NoAttackWithinBounds;
  v.exhausted = exhausted;
  return v;
}

}  // namespace tf
