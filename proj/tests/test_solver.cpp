#include "deduce.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "typeflaw/parse.hpp"
#include "typeflaw/solver.hpp"

using namespace tf;

namespace {

Term P(const std::string& s) { return parse_term(s); }

TermSet Ts(std::initializer_list<const char*> ts) {
  TermSet T;
  for (const char* t : ts) T.insert(P(t));
  return T;
}

ConstraintSequence one(const char* target, std::initializer_list<const char*> ts) {
  ConstraintSequence C;
  C.constraints.push_back(Constraint{P(target), Ts(ts)});
  return C;
}

SolveOptions all_solutions() { return SolveOptions{}; }

SolveOptions first_solution() {
  SolveOptions o;
  o.stop = [](const Solution&) { return true; };
  return o;
}

bool has_rule(const std::vector<RuleStep>& trace, const std::string& rule) {
  for (const auto& s : trace)
    if (s.rule == rule) return true;
  return false;
}

}  // namespace

TEST_CASE("active constraint and elim") {
  std::vector<Constraint> cs{{P("X"), {}}, {P("a"), {}}, {P("Y"), {}}};
  CHECK(active_constraint(cs) == std::optional<std::size_t>(1));
  cs.erase(cs.begin() + 1);
  CHECK_FALSE(active_constraint(cs).has_value());
  Constraint c{P("a"), Ts({"X", "a", "h(Y)"})};
  CHECK(elim(c).knowledge == Ts({"a", "h(Y)"}));
}

TEST_CASE("apply_rule single steps") {
  SolveOptions o;
  auto r = apply_rule("pdec", one("n_a", {"penc([1, n_a]; pk(i))"}), o);
  REQUIRE(r.size() == 1);
  CHECK(r[0].constraints[0].knowledge.count(P("n_a")) == 1);

  CHECK_THROWS_AS(apply_rule("pdec", one("n_a", {"penc(n_a; pk(b))"}), o), RuleNotApplicable);

  auto u = apply_rule("un", one("h(X)", {"h(a)", "h(b)"}), o);
  CHECK(u.size() == 2);

  auto k = apply_rule("ksub", one("n_a", {"penc(n_a; pk(B))"}), o);
  REQUIRE(k.size() == 1);
  CHECK(to_string(k[0].sigma) == "{i/B}");

  auto c = apply_rule("concat", one("[a, b]", {"c"}), o);
  REQUIRE(c.size() == 1);
  CHECK(c[0].constraints.size() == 2);

  auto x = apply_rule("XOR_L", one("xor(a, b)", {"a", "b"}), o);
  REQUIRE(x.size() == 1);
  CHECK(x[0].constraints.size() == 2);

  auto e = apply_rule("senc", one("senc(a; k)", {"a", "k"}), o);
  REQUIRE(e.size() == 1);
  CHECK(e[0].constraints.size() == 2);
}

TEST_CASE("solve small problems") {
  CHECK(solve(one("a", {"a"}), all_solutions()).solutions.size() == 1);
  CHECK(solve(one("n_a", {"a"}), all_solutions()).solutions.empty());
  CHECK(solve(one("[a, h(b)]", {"a", "b"}), all_solutions()).solutions.size() == 1);
  // decryption with a key that must itself be derived
  CHECK_FALSE(solve(one("n_a", {"senc(n_a; k)", "senc(k; pk(i))", "pk(i)"}), first_solution()).solutions.empty());
  CHECK_FALSE(solve(one("n_a", {"senc(n_a; k)", "penc(k; pk(i))"}), first_solution()).solutions.empty());
  CHECK(solve(one("n_a", {"senc(n_a; k)", "penc(k; pk(b))"}), all_solutions()).solutions.empty());
  // XOR: a from xor(a, b) and b
  CHECK_FALSE(solve(one("a", {"xor(a, b)", "b"}), first_solution()).solutions.empty());
  CHECK_FALSE(solve(one("xor(a, c)", {"xor(a, b)", "xor(b, c)"}), first_solution()).solutions.empty());
  CHECK(solve(one("a", {"xor(a, b)", "c"}), all_solutions()).solutions.empty());
  // a variable target is left open
  auto r = solve(one("h(X)", {"h(a)"}), all_solutions());
  REQUIRE_FALSE(r.solutions.empty());
  CHECK(r.stats.exhausted);
}

TEST_CASE("the untagged NSL attack sequence") {
  SemiBundle S = fixtures::bundle("nsl_xor.proto", "two_session.scen");
  SolveOptions o = first_solution();
  bool found = false;
  for (const auto& C : constraint_sequences(S, true)) {
    SolveResult r = solve(C, o);
    if (r.solutions.empty()) continue;
    found = true;
    const Substitution& s = r.solutions[0].sigma;
    CHECK(apply(s, P("N_A_beta")) == P("xor(n_a, b, i)"));
    CHECK(apply(s, P("B_alpha")) == P("i"));
    CHECK_FALSE(is_well_typed(s));
    CHECK(deduce::satisfies(s, C));
    CHECK(has_rule(r.solutions[0].trace, "ksub"));
    SolveOptions wt = o;
    wt.well_typed_only = true;
    SolveResult w = solve(C, wt);
    CHECK(w.solutions.empty());
    CHECK(w.stats.exhausted);
    break;
  }
  CHECK(found);
}

TEST_CASE("every solution satisfies its sequence (deduction oracle)") {
  int checked = 0;
  for (auto [proto, scen] : {std::pair{"nsl_xor.proto", "two_session.scen"},
                             std::pair{"nsl_xor_tagged.proto", "two_session.scen"},
                             std::pair{"gong.proto", "gong.scen"}}) {
    SemiBundle S = fixtures::bundle(proto, scen);
    SolveOptions o;
    o.limits.max_states = 20000;
    for (const auto& C : constraint_sequences(S, false)) {
      SolveResult r = solve(C, o);
      for (const auto& sol : r.solutions) {
        REQUIRE(deduce::satisfies(sol.sigma, C));
        ++checked;
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("limits and the memo") {
  SemiBundle S = fixtures::bundle("nsl_xor.proto", "two_session.scen");
  auto seqs = constraint_sequences(S, true);
  SolveOptions tight;
  tight.limits.max_states = 3;
  SolveResult r = solve(seqs[0], tight);
  CHECK_FALSE(r.stats.exhausted);

  SolveOptions o;
  SolveResult a = solve(seqs[0], o);
  CHECK(a.stats.exhausted);
  CHECK(a.stats.memo_hits > 0);
}

TEST_CASE("weakness rules") {
  SolveOptions o = first_solution();
  ConstraintSequence woo = one("senc([a, b, n_b, 3]; sh(b, s))", {"a", "b", "n_b", "3", "senc([a, b, X, 2]; sh(b, s))"});
  CHECK(solve(woo, o).solutions.empty());
  o.rules.prefix = true;
  o.rules.assoc_pairs = true;
  SolveResult r = solve(woo, o);
  REQUIRE_FALSE(r.solutions.empty());
  CHECK(apply(r.solutions[0].sigma, P("X")) == P("[n_b, 3]"));
  CHECK(r.stats.weakness_steps > 0);

  SolveOptions g = first_solution();
  ConstraintSequence gong = one("passwd(a, b)", {"senc([n_a, k]; passwd(a, b))", "senc([n_a, k2]; passwd(a, b))"});
  g.weak_keys = {P("passwd(a, b)")};
  CHECK(solve(gong, g).solutions.empty());
  g.rules.guessing = true;
  CHECK_FALSE(solve(gong, g).solutions.empty());

  SolveOptions c = first_solution();
  ConstraintSequence cop = one("s", {"penc([1, s, a]; pk(b))", "penc([2, s, a]; pk(b))", "1", "2", "a"});
  CHECK(solve(cop, c).solutions.empty());
  c.rules.rsa_low_exp = true;
  CHECK_FALSE(solve(cop, c).solutions.empty());
}

TEST_CASE("subterm instrumentation") {
  SolveOptions o;
  o.check_subterms = true;
  o.rules.acun = false;
  SolveResult core = solve(one("n_a", {"senc([n_a, k]; k2)", "penc(k2; pk(i))"}), o);
  CHECK_FALSE(core.solutions.empty());
  CHECK(core.stats.subterm_violations == 0);
  o.rules.homomorphic = true;
  SolveResult weak = solve(one("senc(a; k)", {"senc([a, b]; k)"}), o);
  CHECK_FALSE(weak.solutions.empty());
  CHECK(weak.stats.subterm_violations > 0);
  CHECK_FALSE(weak.subterm_witnesses.empty());
}
