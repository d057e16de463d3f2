#include <algorithm>
#include <unordered_set>

#include "typeflaw/acun.hpp"
#include "typeflaw/solver.hpp"

namespace tf {

std::vector<RuleStep> to_vector(const TracePtr& t) {
  std::vector<RuleStep> out;
  for (const TraceNode* n = t.get(); n; n = n->parent.get()) out.push_back(n->step);
  std::reverse(out.begin(), out.end());
  return out;
}

std::optional<std::size_t> active_constraint(const std::vector<Constraint>& cs) {
  for (std::size_t i = 0; i < cs.size(); ++i)
    if (!cs[i].target.is_var()) return i;
  return std::nullopt;
}

Constraint elim(const Constraint& c) {
  Constraint out{c.target, {}};
  for (const Term& t : c.knowledge)
    if (!t.is_var()) out.knowledge.insert(t);
  return out;
}

namespace {

struct State {
  std::vector<Constraint> cs;
  Substitution sigma;
  TracePtr trace;
  int depth = 0;
};

TracePtr push(const TracePtr& t, const std::string& rule, const std::string& detail) {
  return std::make_shared<const TraceNode>(TraceNode{RuleStep{rule, detail}, t});
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::uint64_t state_hash(const State& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& c : s.cs) {
    h = mix(h, c.target.hash());
    h = mix(h, 0xabcdef);
    for (const Term& t : c.knowledge) h = mix(h, t.hash());
  }
  for (const auto& [k, b] : s.sigma.bindings()) h = mix(mix(h, std::hash<std::string>{}(k)), b.value.hash());
  return h;
}

bool heads_clash(const Term& a, const Term& b) {
  if (a.is_var() || b.is_var() || a.is_xor() || b.is_xor()) return false;
  if (a.kind() != b.kind()) return true;
  if (a.args().empty()) return a != b;
  return a.name() != b.name() || a.args().size() != b.args().size();
}

class Search {
 public:
  Search(const SolveOptions& opt, SolveResult& res) : opt_(opt), res_(res) {}

  Term norm(const Term& t) const { return opt_.rules.assoc_pairs ? flatten_concat(t) : t; }

  std::vector<Substitution> unifiers(const Term& m, const Term& t) const {
    if (heads_clash(m, t)) return {};
    if (opt_.rules.assoc_pairs && !m.has_xor() && !t.has_xor()) return unify_assoc(m, t);
    if (opt_.rules.acun) return mgu_combined(m, t);
    auto s = unify_free({{m, t}});
    if (!s) return {};
    return {*s};
  }

  void add_split(const Term& t, TermSet& T) const { split_into(norm(t), T); }

  // Applies tau to every constraint and re-establishes the normal form.
  std::vector<Constraint> substitute(const std::vector<Constraint>& cs, const Substitution& tau) const {
    std::vector<Constraint> out;
    for (const auto& c : cs) {
      TermSet T;
      for (const Term& u : c.knowledge) add_split(apply(tau, u), T);
      Term m = norm(apply(tau, c.target));
      std::vector<Term> parts;
      split_targets(m, parts);
      for (const Term& p : parts) out.push_back(Constraint{p, T});
    }
    return out;
  }

  static void split_targets(const Term& m, std::vector<Term>& out) {
    if (m.is_concat()) {
      for (const Term& e : m.args()) split_targets(e, out);
    } else {
      out.push_back(m);
    }
  }

  // Tracks the terms of the pre-step state for the subterm check.
  struct Universe {
    std::vector<Term> terms;
    bool holds(const Term& t) const {
      for (const Term& u : terms)
        if (is_subterm_or_key(t, u)) return true;
      return false;
    }
  };

  Universe universe_of(const State& s) const {
    Universe u;
    if (!opt_.check_subterms) return u;
    std::set<Term> seen;
    for (const auto& c : s.cs) {
      seen.insert(c.target);
      seen.insert(c.knowledge.begin(), c.knowledge.end());
    }
    u.terms.assign(seen.begin(), seen.end());
    return u;
  }

  // Adds t (split) to T; returns true if something new was added.
  bool add(const Term& t, TermSet& T, const std::string& rule, Universe& u, TracePtr& trace, bool weakness) {
    if (!on(rule)) return false;
    TermSet parts;
    add_split(t, parts);
    bool changed = false;
    for (const Term& p : parts) {
      if (p.is_var() || T.count(p)) continue;
      if (opt_.check_subterms && !u.holds(p)) {
        ++res_.stats.subterm_violations;
        res_.subterm_witnesses.push_back(rule + " added " + to_string(p));
      }
      if (opt_.check_subterms) u.terms.push_back(p);
      T.insert(p);
      changed = true;
    }
    if (changed) {
      trace = push(trace, rule, to_string(t));
      if (weakness) ++res_.stats.weakness_steps;
    }
    return changed;
  }

  // Deterministic closure of a term set: decryptions with known keys, signatures,
  // XOR compaction and the enabled weakness rules.
  void saturate(TermSet& T, Universe& u, TracePtr& trace) {
    const RuleSet& r = opt_.rules;
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<Term> snapshot(T.begin(), T.end());
      for (const Term& t : snapshot) {
        switch (t.kind()) {
          case Kind::Penc:
            if (t.arg(1) == mk_pk(mk_attacker())) changed |= add(t.arg(0), T, "pdec", u, trace, false);
            break;
          case Kind::Senc:
            if (T.count(t.arg(1))) changed |= add(t.arg(0), T, "sdec", u, trace, false);
            break;
          case Kind::Sig: changed |= add(t.arg(0), T, "sigdec", u, trace, false); break;
          case Kind::Xor:
            if (r.acun)
              for (const Term& e : t.args())
                if (T.count(e)) changed |= add(mk_xor({t, e}), T, "XOR_R", u, trace, false);
            break;
          default: break;
        }
        if (t.kind() == Kind::Senc && t.arg(0).is_concat()) {
          const auto& es = t.arg(0).args();
          const Term& k = t.arg(1);
          const std::size_t n = es.size();
          if (r.prefix)
            for (std::size_t j = 1; j < n; ++j)
              changed |= add(mk_senc(mk_concat({es.begin(), es.begin() + j}), k), T, "prefix", u, trace, true);
          if (r.suffix)
            for (std::size_t j = 1; j < n; ++j)
              changed |= add(mk_senc(mk_concat({es.begin() + j, es.end()}), k), T, "suffix", u, trace, true);
          if (r.homomorphic)
            for (const Term& e : es) changed |= add(mk_senc(e, k), T, "homomorphic", u, trace, true);
        }
      }
      if (r.rsa_low_exp) changed |= rsa_low_exp(T, u, trace);
      if (r.guessing) changed |= guessing(T, u, trace);
    }
  }

  bool rsa_low_exp(TermSet& T, Universe& u, TracePtr& trace) {
    std::vector<Term> cands;
    for (const Term& t : T)
      if (t.kind() == Kind::Penc && t.arg(0).is_concat() && t.arg(0).args().size() == 3) cands.push_back(t);
    bool changed = false;
    for (std::size_t i = 0; i < cands.size(); ++i)
      for (std::size_t j = i + 1; j < cands.size(); ++j) {
        const Term &p = cands[i], &q = cands[j];
        if (p.arg(1) != q.arg(1)) continue;
        const auto &x = p.arg(0).args(), &y = q.arg(0).args();
        if (x[1] != y[1] || (x[0] == y[0] && x[2] == y[2])) continue;
        if (!T.count(x[0]) || !T.count(x[2]) || !T.count(y[0]) || !T.count(y[2])) continue;
        changed |= add(x[1], T, "rsa_low_exp", u, trace, true);
      }
    return changed;
  }

  bool guessing(TermSet& T, Universe& u, TracePtr& trace) {
    std::vector<Term> cands;
    for (const Term& t : T)
      if (t.kind() == Kind::Senc && t.arg(0).is_concat() && opt_.weak_keys.count(t.arg(1))) cands.push_back(t);
    bool changed = false;
    for (std::size_t i = 0; i < cands.size(); ++i)
      for (std::size_t j = i + 1; j < cands.size(); ++j) {
        const Term &p = cands[i], &q = cands[j];
        if (p.arg(1) != q.arg(1)) continue;
        if (p.arg(0).arg(0) != q.arg(0).arg(0)) continue;
        changed |= add(p.arg(1), T, "guessing", u, trace, true);
      }
    return changed;
  }

  void solution(const State& s) {
    Solution sol{s.sigma, to_vector(s.trace)};
    res_.solutions.push_back(sol);
    if (opt_.stop && opt_.stop(sol)) res_.stats.stopped = true;
  }

  bool done() const { return res_.stats.stopped; }

  State successor(const State& s, std::vector<Constraint> cs, const std::string& rule, const std::string& detail) {
    State n;
    n.cs = std::move(cs);
    n.sigma = s.sigma;
    n.trace = push(s.trace, rule, detail);
    n.depth = s.depth + 1;
    return n;
  }

  // Successor that satisfies constraint idx by tau.
  std::optional<State> unified(const State& s, std::size_t idx, const Substitution& tau, const std::string& rule,
                               const std::string& detail) {
    ++res_.stats.unifiers;
    bool wt = is_well_typed(tau);
    if (!wt) ++res_.stats.ill_typed_unifiers;
    if (!wt && opt_.well_typed_only) return std::nullopt;
    std::vector<Constraint> rest;
    for (std::size_t i = 0; i < s.cs.size(); ++i)
      if (i != idx) rest.push_back(s.cs[i]);
    State n = successor(s, substitute(rest, tau), rule, detail + " with " + to_string(tau));
    try {
      n.sigma = compose(s.sigma, tau);
    } catch (const Conflict&) {
      return std::nullopt;
    }
    return n;
  }

  void run(State s) {
    if (done()) return;
    if (++res_.stats.states > opt_.limits.max_states || s.depth > opt_.limits.max_depth) {
      res_.stats.exhausted = false;
      return;
    }
    auto ai = active_constraint(s.cs);
    if (!ai) {
      solution(s);
      return;
    }
    expand(std::move(s), *ai);
  }

  void emit(State n) {
    if (sink_)
      sink_(std::move(n));
    else
      run(std::move(n));
  }

  // Rule applications to the active constraint idx, in the fixed order.
  void expand(State s, std::size_t idx) {
    {
      Universe u = universe_of(s);
      Constraint c = elim(s.cs[idx]);
      saturate(c.knowledge, u, s.trace);
      s.cs[idx] = std::move(c);
    }
    if (use_memo_ && !memo_.insert(state_hash(s)).second) {
      ++res_.stats.memo_hits;
      return;
    }
    const Constraint& c = s.cs[idx];
    const Term& m = c.target;

    if (on("un") && c.knowledge.count(m)) {
      std::vector<Constraint> rest = s.cs;
      rest.erase(rest.begin() + static_cast<long>(idx));
      emit(successor(s, std::move(rest), "un", to_string(m) + " known"));
      return;
    }

    // (sdec) with a key that still has to be derived
    for (const Term& t : c.knowledge) {
      if (!on("sdec")) break;
      if (t.kind() != Kind::Senc || c.knowledge.count(t.arg(1)) || t.arg(1) == m) continue;
      TermSet plain;
      add_split(t.arg(0), plain);
      if (std::all_of(plain.begin(), plain.end(), [&](const Term& p) { return c.knowledge.count(p) > 0; })) continue;
      std::vector<Constraint> cs = s.cs;
      TermSet without = c.knowledge;
      without.erase(t);
      Universe u = universe_of(s);
      TracePtr tr = s.trace;
      Constraint main = c;
      add(t.arg(0), main.knowledge, "sdec", u, tr, false);
      add(t.arg(1), main.knowledge, "sdec", u, tr, false);
      cs[idx] = main;
      cs.insert(cs.begin() + static_cast<long>(idx), Constraint{t.arg(1), without});
      emit(successor(s, std::move(cs), "sdec", to_string(t)));
      if (done()) return;
    }

    // (un)
    for (const Term& t : c.knowledge) {
      if (!on("un")) break;
      for (const Substitution& tau : unifiers(m, t)) {
        if (tau.empty()) continue;
        if (auto n = unified(s, idx, tau, "un", to_string(m) + " = " + to_string(t))) emit(std::move(*n));
        if (done()) return;
      }
    }

    // composition
    {
      std::vector<Term> subgoals;
      std::string rule;
      switch (m.kind()) {
        case Kind::Penc: rule = "penc", subgoals = {m.arg(1), m.arg(0)}; break;
        case Kind::Senc: rule = "senc", subgoals = {m.arg(1), m.arg(0)}; break;
        case Kind::Hash: rule = "Hash", subgoals = {m.arg(0)}; break;
        case Kind::Sig: rule = "Sig", subgoals = {m.arg(0), m.arg(1)}; break;
        case Kind::Xor:
          if (opt_.rules.acun) {
            rule = "XOR_L";
            std::vector<Term> rest(m.args().begin() + 1, m.args().end());
            subgoals = {m.arg(0), mk_xor(rest)};
          }
          break;
        default: break;
      }
      if (!subgoals.empty() && on(rule)) {
        std::vector<Constraint> cs = s.cs;
        std::vector<Constraint> repl;
        for (const Term& g : subgoals) {
          std::vector<Term> parts;
          split_targets(norm(g), parts);
          for (const Term& p : parts) repl.push_back(Constraint{p, c.knowledge});
        }
        cs.erase(cs.begin() + static_cast<long>(idx));
        cs.insert(cs.begin() + static_cast<long>(idx), repl.begin(), repl.end());
        emit(successor(s, std::move(cs), rule, to_string(m)));
        if (done()) return;
      }
    }

    // (XOR_R), goal directed: sums of known terms that unify with the target
    if (opt_.rules.acun && on("XOR_R")) xor_r(s, idx);
    if (done()) return;

    // (ksub)
    for (const Term& t : c.knowledge) {
      if (!on("ksub")) break;
      if (t.kind() != Kind::Penc) continue;
      const Term& k = t.arg(1);
      Substitution tau;
      if (k.kind() == Kind::Pk && k.arg(0).is_var())
        tau.bind(k.arg(0), mk_attacker());
      else if (k.is_var())
        tau.bind(k, mk_pk(mk_attacker()));
      else
        continue;
      ++res_.stats.unifiers;
      State n = successor(s, substitute(s.cs, tau), "ksub", to_string(t) + " with " + to_string(tau));
      n.sigma = compose(s.sigma, tau);
      emit(std::move(n));
      if (done()) return;
    }
  }

  void xor_r(const State& s, std::size_t idx) {
    const Constraint& c = s.cs[idx];
    const Term& m = c.target;
    std::set<Term> relevant;
    for (const Term& e : xor_elements(m)) relevant.insert(e);
    std::vector<Term> xors, pool;
    for (const Term& t : c.knowledge)
      if (t.is_xor()) {
        xors.push_back(t);
        for (const Term& e : t.args()) relevant.insert(e);
      }
    if (xors.empty()) return;
    for (const Term& t : c.knowledge)
      if (t.is_xor() || relevant.count(t)) pool.push_back(t);
    const int bound = std::min<int>(opt_.limits.xor_subset_bound, static_cast<int>(pool.size()));
    std::vector<std::size_t> pick;
    std::set<Term> tried;
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
      if (done()) return;
      if (pick.size() >= 2) {
        bool has_xor = false;
        std::vector<Term> es;
        for (std::size_t i : pick) {
          has_xor = has_xor || pool[i].is_xor();
          es.push_back(pool[i]);
        }
        Term sum = mk_xor(es);
        if (has_xor && !c.knowledge.count(sum) && tried.insert(sum).second) {
          if (sum == m) {
            std::vector<Constraint> rest = s.cs;
            rest.erase(rest.begin() + static_cast<long>(idx));
            emit(successor(s, std::move(rest), "XOR_R", to_string(m) + " = " + to_string(mk_xor_raw(es))));
          } else {
            for (const Substitution& tau : unifiers(m, sum)) {
              if (tau.empty()) continue;
              if (auto n = unified(s, idx, tau, "XOR_R", to_string(m) + " = " + to_string(mk_xor_raw(es))))
                emit(std::move(*n));
              if (done()) return;
            }
          }
        }
      }
      if (static_cast<int>(pick.size()) == bound) return;
      for (std::size_t i = from; i < pool.size(); ++i) {
        pick.push_back(i);
        rec(i + 1);
        pick.pop_back();
        if (done()) return;
      }
    };
    rec(0);
  }

  bool on(const std::string& rule) const { return only_.empty() || only_ == rule; }

  std::string only_;  // restrict to one rule, for single steps
  bool use_memo_ = true;
  std::function<void(State)> sink_;

 private:
  const SolveOptions& opt_;
  SolveResult& res_;
  std::unordered_set<std::uint64_t> memo_;
};

}  // namespace

std::vector<ConstraintSequence> apply_rule(const std::string& rule, const ConstraintSequence& C,
                                           const SolveOptions& opt) {
  auto ai = active_constraint(C.constraints);
  if (!ai) throw RuleNotApplicable(rule + ": no active constraint");
  const std::size_t idx = *ai;
  std::vector<ConstraintSequence> out;
  auto with = [&](std::vector<Constraint> cs, Substitution sigma) {
    ConstraintSequence n;
    n.constraints = std::move(cs);
    n.sigma = std::move(sigma);
    n.order = C.order;
    out.push_back(std::move(n));
  };
  const Constraint& c = C.constraints[idx];
  if (rule == "elim") {
    Constraint e = elim(c);
    if (e.knowledge.size() == c.knowledge.size()) throw RuleNotApplicable("elim");
    auto cs = C.constraints;
    cs[idx] = e;
    with(cs, C.sigma);
    return out;
  }
  if (rule == "concat" || rule == "split") {
    auto cs = C.constraints;
    if (rule == "concat") {
      if (!c.target.is_concat()) throw RuleNotApplicable("concat");
      cs.erase(cs.begin() + static_cast<long>(idx));
      std::vector<Constraint> parts;
      for (const Term& e : c.target.args()) parts.push_back(Constraint{e, c.knowledge});
      cs.insert(cs.begin() + static_cast<long>(idx), parts.begin(), parts.end());
    } else {
      TermSet T;
      for (const Term& u : c.knowledge) split_into(u, T);
      if (T == c.knowledge) throw RuleNotApplicable("split");
      cs[idx].knowledge = T;
    }
    with(cs, C.sigma);
    return out;
  }
  SolveResult res;
  SolveOptions o = opt;
  o.rules.prefix = o.rules.prefix || rule == "prefix";
  o.rules.suffix = o.rules.suffix || rule == "suffix";
  o.rules.homomorphic = o.rules.homomorphic || rule == "homomorphic";
  o.rules.rsa_low_exp = o.rules.rsa_low_exp || rule == "rsa_low_exp";
  o.rules.guessing = o.rules.guessing || rule == "guessing";
  Search search(o, res);
  search.only_ = rule;
  search.use_memo_ = false;
  std::vector<State> succ;
  search.sink_ = [&](State n) { succ.push_back(std::move(n)); };
  State s;
  s.cs = C.constraints;
  s.sigma = C.sigma;
  const TermSet before = elim(c).knowledge;
  search.expand(s, idx);
  if (succ.empty()) {
    // saturation rules change the term set in place
    State t;
    t.cs = C.constraints;
    Search::Universe u;
    Constraint e = elim(c);
    search.saturate(e.knowledge, u, t.trace);
    if (e.knowledge == before) throw RuleNotApplicable(rule);
    t.cs[idx] = e;
    with(t.cs, C.sigma);
    return out;
  }
  for (auto& n : succ) with(std::move(n.cs), std::move(n.sigma));
  return out;
}

SolveResult solve(const ConstraintSequence& C, const SolveOptions& opt) {
  SolveResult res;
  Search search(opt, res);
  State s;
  s.sigma = C.sigma;
  s.cs = search.substitute(normalize_sequence(C).constraints, Substitution{});
  search.run(std::move(s));
  return res;
}

}  // namespace tf
