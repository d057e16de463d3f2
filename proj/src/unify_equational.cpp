#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "typeflaw/acun.hpp"

namespace tf {

namespace {

bool is_leaf(const Term& t) { return t.is_var() || t.is_atom() || t.is_const(); }

struct Purifier {
  int next;
  std::vector<Equation> std_eqs, acun_eqs;
  std::map<std::string, Term> abstraction;
  std::vector<std::pair<Term, Term>> memo;  // alien term -> variable

  Term abstract(const Term& u) {
    for (const auto& [t, w] : memo)
      if (t == u) return w;
    Term w = mk_var("_W" + std::to_string(next++), type_of(u));
    memo.emplace_back(u, w);
    abstraction.emplace(w.name(), u);
    if (u.is_xor())
      acun_eqs.emplace_back(w, pure_acun(u));
    else
      std_eqs.emplace_back(w, pure_std(u));
    return w;
  }

  Term pure_std(const Term& t) {
    if (t.is_xor()) return abstract(t);
    if (!t.has_xor()) return t;
    std::vector<Term> args;
    for (const Term& a : t.args()) args.push_back(pure_std(a));
    return rebuild(t, std::move(args));
  }

  Term pure_acun(const Term& t) {
    if (is_leaf(t)) return t;
    if (!t.is_xor()) return abstract(t);
    std::vector<Term> elems;
    for (const Term& e : t.args()) elems.push_back(is_leaf(e) ? e : abstract(e));
    return mk_xor(std::move(elems));
  }
};

Term freeze(const Term& t, const std::set<std::string>& names) {
  if (t.ground()) return t;
  if (t.is_var()) return names.count(t.name()) ? mk_atom("\x02" + t.name(), t.declared_type()) : t;
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(freeze(a, names));
  return rebuild(t, std::move(args));
}

Term thaw(const Term& t) {
  if (t.is_atom()) return t.name()[0] == '\x02' ? mk_var(t.name().substr(1), t.declared_type()) : t;
  if (t.args().empty()) return t;
  std::vector<Term> args;
  for (const Term& a : t.args()) args.push_back(thaw(a));
  return rebuild(t, std::move(args));
}

}  // namespace

Purified purify(const std::vector<Equation>& eqs, int first_index) {
  Purifier p{first_index, {}, {}, {}, {}};
  for (const auto& [l0, r0] : eqs) {
    Term l = xor_normalize(l0), r = xor_normalize(r0);
    if (l.is_xor() || r.is_xor()) {
      p.acun_eqs.emplace_back(p.pure_acun(l), p.pure_acun(r));
    } else {
      p.std_eqs.emplace_back(p.pure_std(l), p.pure_std(r));
    }
  }
  Purified out;
  if (!p.std_eqs.empty()) out.problems.push_back(PureProblem{Theory::STD, p.std_eqs});
  if (!p.acun_eqs.empty()) out.problems.push_back(PureProblem{Theory::ACUN, p.acun_eqs});
  out.abstraction = std::move(p.abstraction);
  return out;
}

std::optional<Substitution> unify_acun_ordered(const std::vector<Equation>& eqs,
                                               const std::function<int(const Term&)>& rank,
                                               const std::function<bool(const Term&)>& unknown) {
  std::vector<Term> syms;
  std::vector<std::vector<Term>> rows_terms;
  for (const auto& [l, r] : eqs) {
    std::vector<Term> row;
    for (const Term& side : {l, r})
      for (const Term& e : xor_elements(xor_normalize(side))) {
        if (!is_leaf(e)) throw ImpureProblem("non-constant below XOR in an ACUN problem: " + to_string(e));
        row.push_back(e);
        syms.push_back(e);
      }
    rows_terms.push_back(std::move(row));
  }
  std::sort(syms.begin(), syms.end(), [&](const Term& a, const Term& b) {
    int ra = rank(a), rb = rank(b);
    if (ra != rb) return ra < rb;
    return a < b;
  });
  syms.erase(std::unique(syms.begin(), syms.end()), syms.end());
  const std::size_t n = syms.size();
  const std::size_t words = (n + 63) / 64;
  auto index_of = [&](const Term& t) {
    auto it = std::lower_bound(syms.begin(), syms.end(), t, [&](const Term& a, const Term& b) {
      int ra = rank(a), rb = rank(b);
      if (ra != rb) return ra < rb;
      return a < b;
    });
    return static_cast<std::size_t>(it - syms.begin());
  };
  using Row = std::vector<std::uint64_t>;
  std::vector<Row> rows;
  for (const auto& rt : rows_terms) {
    Row row(words, 0);
    for (const Term& e : rt) {
      std::size_t i = index_of(e);
      row[i / 64] ^= (std::uint64_t{1} << (i % 64));
    }
    rows.push_back(std::move(row));
  }
  auto bit = [](const Row& r, std::size_t i) { return (r[i / 64] >> (i % 64)) & 1U; };
  std::vector<std::pair<std::size_t, std::size_t>> pivots;  // (row, column)
  std::vector<bool> used(rows.size(), false);
  for (std::size_t c = n; c-- > 0;) {
    std::size_t pr = rows.size();
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (!used[r] && bit(rows[r], c)) {
        pr = r;
        break;
      }
    if (pr == rows.size()) continue;
    if (!unknown(syms[c])) return std::nullopt;
    used[pr] = true;
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (r != pr && bit(rows[r], c))
        for (std::size_t w = 0; w < words; ++w) rows[r][w] ^= rows[pr][w];
    pivots.emplace_back(pr, c);
  }
  Substitution s;
  for (const auto& [r, c] : pivots) {
    std::vector<Term> rhs;
    for (std::size_t i = 0; i < n; ++i)
      if (i != c && bit(rows[r], i)) rhs.push_back(syms[i]);
    s.bind(syms[c], mk_xor(std::move(rhs)));
  }
  return s;
}

std::vector<Substitution> unify_acun(const PureProblem& p) {
  if (p.theory != Theory::ACUN) throw ImpureProblem("unify_acun needs an ACUN problem");
  auto r = unify_acun_ordered(
      p.equations, [](const Term& t) { return t.is_var() ? 1 : 0; }, [](const Term& t) { return t.is_var(); });
  if (!r) return {};
  return {*r};
}

Substitution combine(const Substitution& sigma_std, const Substitution& sigma_acun, const CombinationChoice& choice,
                     const std::map<std::string, Term>& abstraction) {
  Substitution theta;
  for (const auto& cls : choice.identification)
    for (std::size_t j = 1; j < cls.size(); ++j) theta.bind(cls[j], cls[0]);
  for (const auto& [k, b] : sigma_std.bindings()) {
    if (theta.binds(k)) throw Conflict("variable " + k + " is not a representative");
    theta.bind(b.var, b.value);
  }
  for (const auto& [k, b] : sigma_acun.bindings()) {
    if (theta.binds(k)) throw Conflict("variable " + k + " bound by both theories");
    theta.bind(b.var, b.value);
  }
  // the linear order makes the union acyclic; resolving it is the induction on that order
  theta.resolve();
  std::set<std::string> keep;
  for (const auto& [k, b] : theta.bindings())
    if (!abstraction.count(k)) keep.insert(k);
  return theta.restricted(keep);
}

namespace {

struct Combiner {
  std::vector<Equation> original;
  Purified pur;
  std::vector<Equation> std_eqs, acun_eqs;
  std::map<std::string, Term> var_terms;  // every variable of the pure problems
  std::vector<std::string> shared;
  std::set<std::string> forced_std;
  std::map<std::pair<std::string, std::string>, bool> compatible;
  std::map<std::string, Term> original_vars;
  std::vector<Substitution> results;

  void setup() {
    pur = purify(original);
    for (const auto& pp : pur.problems) (pp.theory == Theory::STD ? std_eqs : acun_eqs) = pp.equations;
    std::map<std::string, Term> vs, va;
    for (const auto& [l, r] : std_eqs) {
      collect_vars(l, vs);
      collect_vars(r, vs);
    }
    for (const auto& [l, r] : acun_eqs) {
      collect_vars(l, va);
      collect_vars(r, va);
    }
    var_terms = vs;
    var_terms.insert(va.begin(), va.end());
    for (const auto& [k, v] : vs)
      if (va.count(k)) shared.push_back(k);
    std::map<std::string, Term> defs;
    for (const auto& [l, r] : std_eqs)
      if (l.is_var() && pur.abstraction.count(l.name()) && !defs.count(l.name())) defs.emplace(l.name(), r);
    for (const auto& s : shared)
      if (defs.count(s)) forced_std.insert(s);
    for (const auto& a : forced_std)
      for (const auto& b : forced_std)
        if (a < b) compatible[{a, b}] = unify_free({{defs.at(a), defs.at(b)}}).has_value();
    for (const auto& [l, r] : original) {
      collect_vars(l, original_vars);
      collect_vars(r, original_vars);
    }
  }

  bool compat(const std::string& a, const std::string& b) const {
    if (!forced_std.count(a) || !forced_std.count(b)) return true;
    auto it = compatible.find(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
    return it == compatible.end() || it->second;
  }

  void run() {
    std::vector<std::vector<Term>> classes;
    partitions(0, classes);
  }

  void partitions(std::size_t i, std::vector<std::vector<Term>>& classes) {
    if (i == shared.size()) {
      assignments(classes);
      return;
    }
    const Term& v = var_terms.at(shared[i]);
    for (std::size_t c = 0, n = classes.size(); c < n; ++c) {
      bool ok = std::all_of(classes[c].begin(), classes[c].end(),
                            [&](const Term& m) { return compat(m.name(), v.name()); });
      if (!ok) continue;
      classes[c].push_back(v);
      partitions(i + 1, classes);
      classes[c].pop_back();
    }
    classes.push_back({v});
    partitions(i + 1, classes);
    classes.pop_back();
  }

  void assignments(const std::vector<std::vector<Term>>& classes) {
    std::vector<std::size_t> free_classes;
    std::map<std::string, Theory> assign;
    for (std::size_t c = 0; c < classes.size(); ++c) {
      bool forced = std::any_of(classes[c].begin(), classes[c].end(),
                                [&](const Term& m) { return forced_std.count(m.name()) > 0; });
      if (forced)
        assign[classes[c][0].name()] = Theory::STD;
      else
        free_classes.push_back(c);
    }
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free_classes.size()); ++mask) {
      for (std::size_t j = 0; j < free_classes.size(); ++j)
        assign[classes[free_classes[j]][0].name()] = ((mask >> j) & 1U) ? Theory::ACUN : Theory::STD;
      CombinationChoice ch;
      ch.identification = classes;
      ch.theory_assignment = assign;
      std::vector<std::string> reps;
      for (const auto& cls : classes) reps.push_back(cls[0].name());
      std::vector<bool> taken(reps.size(), false);
      orders(ch, reps, taken);
    }
  }

  void orders(CombinationChoice& ch, const std::vector<std::string>& reps, std::vector<bool>& taken) {
    if (ch.ordering.size() == reps.size()) {
      attempt(ch);
      return;
    }
    for (std::size_t i = 0; i < reps.size(); ++i) {
      if (taken[i]) continue;
      if (!ch.ordering.empty()) {
        const std::string& last = ch.ordering.back();
        if (ch.theory_assignment.at(last) == ch.theory_assignment.at(reps[i]) && !(last < reps[i])) continue;
      }
      taken[i] = true;
      ch.ordering.push_back(reps[i]);
      orders(ch, reps, taken);
      ch.ordering.pop_back();
      taken[i] = false;
    }
  }

  void attempt(const CombinationChoice& ch) {
    Substitution ident;
    for (const auto& cls : ch.identification)
      for (std::size_t j = 1; j < cls.size(); ++j) ident.bind(cls[j], cls[0]);
    std::map<std::string, int> pos;
    for (std::size_t j = 0; j < ch.ordering.size(); ++j) pos[ch.ordering[j]] = static_cast<int>(j) + 1;
    std::set<std::string> acun_reps, std_reps;
    for (const auto& [r, th] : ch.theory_assignment) (th == Theory::ACUN ? acun_reps : std_reps).insert(r);
    for (const auto& cls : ch.identification)
      for (std::size_t j = 1; j < cls.size(); ++j) (acun_reps.count(cls[0].name()) ? acun_reps : std_reps).insert(cls[j].name());

    std::vector<Equation> se;
    for (const auto& [l, r] : std_eqs) se.emplace_back(freeze(apply(ident, l), acun_reps), freeze(apply(ident, r), acun_reps));
    auto s_std = unify_free(se);
    if (!s_std) return;
    Substitution sigma_std;
    for (const auto& [k, b] : s_std->bindings()) {
      Term v = thaw(b.value);
      if (pos.count(k)) {
        for (const auto& c : var_names(v))
          if (acun_reps.count(c) && pos.at(c) >= pos.at(k)) return;
      }
      sigma_std.bind(b.var, v);
    }

    std::vector<Equation> ae;
    for (const auto& [l, r] : acun_eqs) ae.emplace_back(apply(ident, l), apply(ident, r));
    const int top = static_cast<int>(ch.ordering.size()) + 1;
    auto rank = [&](const Term& t) {
      std::string n = t.is_var() ? t.name() : "";
      if (n.empty()) return 0;
      auto it = pos.find(n);
      return it == pos.end() ? top : it->second;
    };
    auto unknown = [&](const Term& t) { return t.is_var() && !std_reps.count(t.name()); };
    std::optional<Substitution> s_acun;
    try {
      s_acun = unify_acun_ordered(ae, rank, unknown);
    } catch (const ImpureProblem&) {
      return;
    }
    if (!s_acun) return;
    Substitution theta;
    try {
      theta = combine(sigma_std, *s_acun, ch, pur.abstraction);
    } catch (const Conflict&) {
      return;
    }
    {
      std::set<std::string> keep;
      for (const auto& [k, v] : original_vars) keep.insert(k);
      theta = theta.restricted(keep);
    }
    for (const auto& [l, r] : original)
      if (!acun_equal(apply(theta, l), apply(theta, r))) return;
    for (const auto& prev : results)
      if (prev == theta) return;
    results.push_back(theta);
  }
};

std::vector<Substitution> minimize(std::vector<Substitution> rs, const std::map<std::string, Term>& vars) {
  std::vector<Substitution> out;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    bool subsumed = false;
    for (std::size_t j = 0; j < rs.size() && !subsumed; ++j) {
      if (i == j) continue;
      if (is_instance(rs[i], rs[j], vars)) {
        // keep the earlier of two equivalent unifiers
        subsumed = !(is_instance(rs[j], rs[i], vars) && i < j);
      }
    }
    if (!subsumed) out.push_back(rs[i]);
  }
  return out;
}

struct PairKey {
  Term a, b;
  bool operator==(const PairKey& o) const { return a == o.a && b == o.b; }
};
struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const { return k.a.hash() * 31 + k.b.hash(); }
};

}  // namespace

namespace {

bool free_head(const Term& t) { return !t.is_xor() && !t.is_var(); }

// Splits equations under a shared free symbol; false when two free heads clash.
bool decompose(const Term& l, const Term& r, std::vector<Equation>& out) {
  if (free_head(l) && free_head(r)) {
    if (l.kind() != r.kind() || l.name() != r.name() || l.args().size() != r.args().size()) return false;
    if (l.args().empty()) return true;
    for (std::size_t i = 0; i < l.args().size(); ++i)
      if (!decompose(l.arg(i), r.arg(i), out)) return false;
    return true;
  }
  if (l != r) out.emplace_back(l, r);
  return true;
}

std::vector<Substitution> combine_one(const Equation& e) {
  Combiner c;
  c.original = {e};
  c.setup();
  c.run();
  return minimize(std::move(c.results), c.original_vars);
}

// Solves the equations one at a time, threading each unifier through the rest.
void solve_in_turn(std::vector<Equation> eqs, const Substitution& acc, std::vector<Substitution>& out) {
  std::vector<Equation> split;
  for (const auto& [l, r] : eqs) {
    Term a = xor_normalize(l), b = xor_normalize(r);
    if (!decompose(a, b, split)) return;
  }
  if (split.empty()) {
    out.push_back(acc);
    return;
  }
  // free equations first, then the xor equation with the fewest variables
  std::size_t pick = 0;
  auto cost = [](const Equation& e) {
    if (!e.first.has_xor() && !e.second.has_xor()) return std::size_t{0};
    return 1 + var_names(e.first).size() + var_names(e.second).size();
  };
  for (std::size_t i = 1; i < split.size(); ++i)
    if (cost(split[i]) < cost(split[pick])) pick = i;
  Equation e = split[pick];
  split.erase(split.begin() + static_cast<std::ptrdiff_t>(pick));
  std::vector<Substitution> step;
  if (cost(e) == 0) {
    if (auto s = unify_free({e})) step.push_back(*s);
  } else {
    step = combine_one(e);
  }
  for (const auto& s : step) {
    std::vector<Equation> rest;
    for (const auto& [l, r] : split) rest.emplace_back(apply(s, l), apply(s, r));
    solve_in_turn(std::move(rest), compose(acc, s), out);
  }
}

}  // namespace

std::vector<Substitution> mgu_combined(const std::vector<Equation>& eqs0) {
  std::vector<Equation> eqs;
  bool any_xor = false, all_ground = true;
  std::map<std::string, Term> vars;
  for (const auto& [l, r] : eqs0) {
    eqs.emplace_back(xor_normalize(l), xor_normalize(r));
    any_xor = any_xor || eqs.back().first.has_xor() || eqs.back().second.has_xor();
    all_ground = all_ground && l.ground() && r.ground();
    collect_vars(l, vars);
    collect_vars(r, vars);
  }
  if (all_ground) {
    for (const auto& [l, r] : eqs)
      if (l != r) return {};
    return {Substitution{}};
  }
  if (!any_xor) {
    auto s = unify_free(eqs);
    if (!s) return {};
    return {*s};
  }
  std::vector<Substitution> out;
  solve_in_turn(std::move(eqs), Substitution{}, out);
  std::set<std::string> keep;
  for (const auto& [k, v] : vars) keep.insert(k);
  std::vector<Substitution> rs;
  for (const auto& s : out) {
    Substitution r = s.restricted(keep);
    if (std::find(rs.begin(), rs.end(), r) == rs.end()) rs.push_back(r);
  }
  return minimize(std::move(rs), vars);
}

std::vector<Substitution> mgu_combined(const Term& t, const Term& u) {
  thread_local std::unordered_map<PairKey, std::vector<Substitution>, PairKeyHash> cache;
  PairKey key{t, u};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  auto r = mgu_combined(std::vector<Equation>{{t, u}});
  if (cache.size() > 200000) cache.clear();
  cache.emplace(key, r);
  return r;
}

}  // namespace tf
