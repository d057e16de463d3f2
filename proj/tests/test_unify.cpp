#include "doctest.h"
#include "oracle.hpp"
#include "typeflaw/parse.hpp"

using namespace tf;

namespace {

Term P(const std::string& s) { return parse_term(s); }

std::string S(const std::optional<Substitution>& s) { return s ? to_string(*s) : "none"; }

}  // namespace

TEST_CASE("mgu_syntactic") {
  CHECK(S(mgu_syntactic(P("X"), P("X"))) == "{}");
  CHECK(S(mgu_syntactic(P("penc([1, n_a]; pk(B))"), P("penc([1, N_B]; pk(a))"))) == "{a/B, n_a/N_B}");
  CHECK(S(mgu_syntactic(P("[2, A]"), P("[2, b]"))) == "{b/A}");
  CHECK(S(mgu_syntactic(P("X"), P("penc(X; k)"))) == "none");
  CHECK_THROWS_AS(mgu_syntactic(P("xor(X, a)"), P("b")), ImpureProblem);
  CHECK(S(mgu_syntactic(P("penc(X; k)"), P("senc(X; k)"))) == "none");
  CHECK(S(mgu_syntactic(P("[X, Y]"), P("[a, b, c]"))) == "none");
  CHECK(S(mgu_syntactic(P("h(X)"), P("sig(X; k)"))) == "none");
}

TEST_CASE("mgu_syntactic is most general on random problems") {
  oracle::ProblemGen g(5);
  int checked = 0;
  for (int n = 0; n < 400 && checked < 100; ++n) {
    auto [t, u] = g.problem();
    if (t.has_xor() || u.has_xor()) continue;
    auto s = mgu_syntactic(t, u);
    auto eqz = oracle::ground_equalizers(t, u);
    if (!s) {
      CHECK(eqz.empty());
      continue;
    }
    ++checked;
    REQUIRE(apply(*s, t) == apply(*s, u));
    REQUIRE(s->is_idempotent());
    std::set<std::string> vars = var_names(t);
    for (const auto& v : var_names(u)) vars.insert(v);
    for (const auto& gr : eqz) REQUIRE(oracle::ground_instance(gr, *s, vars));
  }
  CHECK(checked > 20);
}

TEST_CASE("unify_acun") {
  Term a = P("a"), b = P("b");
  auto r1 = unify_acun(PureProblem{Theory::ACUN, {{P("xor(a, b)"), P("xor(b, a)")}}});
  REQUIRE(r1.size() == 1);
  CHECK(r1[0].empty());
  auto r2 = unify_acun(PureProblem{Theory::ACUN, {{P("xor(X, a)"), b}}});
  REQUIRE(r2.size() == 1);
  CHECK(to_string(r2[0]) == "{xor(a,b)/X}");
  CHECK_THROWS_AS(unify_acun(PureProblem{Theory::ACUN, {{P("xor(h(X), a)"), b}}}), ImpureProblem);

  // W, X, Y, Z as constants
  auto constant = [](const Term&) { return false; };
  auto rank = [](const Term&) { return 0; };
  std::vector<Equation> wxyz{{P("W"), P("xor(X, Y, Z)")}};
  CHECK_FALSE(unify_acun_ordered(wxyz, rank, constant).has_value());
  std::vector<Equation> wxyy{{P("W"), mk_xor_raw({P("X"), P("Y"), P("Y")})}};
  CHECK_FALSE(unify_acun_ordered(wxyy, rank, constant).has_value());
  std::vector<Equation> xxyy{{P("X"), mk_xor_raw({P("X"), P("Y"), P("Y")})}};
  CHECK(unify_acun_ordered(xxyy, rank, constant).has_value());
}

TEST_CASE("purify") {
  Term t = P("penc([1, n_a]; pk(B))");
  Term u = P("xor(penc([1, N_B]; pk(a)), [2, A], [2, b])");
  Purified p = purify({{t, u}});
  REQUIRE(p.problems.size() == 2);
  CHECK(p.abstraction.size() == 4);
  const PureProblem& std_p = p.problems[0].theory == Theory::STD ? p.problems[0] : p.problems[1];
  const PureProblem& acun_p = p.problems[0].theory == Theory::ACUN ? p.problems[0] : p.problems[1];
  CHECK(std_p.equations.size() == 4);
  REQUIRE(acun_p.equations.size() == 1);
  CHECK(xor_elements(acun_p.equations[0].second).size() == 3);

  Purified q = purify({{P("[a, X]"), P("[Y, b]")}});
  REQUIRE(q.problems.size() == 1);
  CHECK(q.problems[0].theory == Theory::STD);
  CHECK(q.abstraction.empty());

  Purified r = purify({{P("xor(a, b)"), P("xor(a, b)")}});
  REQUIRE(r.problems.size() == 1);
  CHECK(r.problems[0].theory == Theory::ACUN);
  CHECK(r.abstraction.empty());
}

TEST_CASE("combine") {
  Substitution ba;
  ba.bind(P("A"), P("b"));
  CHECK(combine(ba, Substitution{}, CombinationChoice{}, {}) == ba);
  Substitution s35;
  s35.bind(mk_var("N_B", TypeTag::nonce()), P("n_a"));
  s35.bind(P("A"), P("b"));
  s35.bind(P("B"), P("a"));
  CHECK(to_string(combine(s35, Substitution{}, CombinationChoice{}, {})) == "{b/A, a/B, n_a/N_B}");
  Substitution x, y;
  x.bind(P("X"), P("a"));
  y.bind(P("Y"), P("xor(b, c)"));
  Substitution xy = combine(x, y, CombinationChoice{}, {});
  CHECK(apply(xy, P("[X, Y]")) == P("[a, xor(b, c)]"));
  Substitution cyc1, cyc2;
  cyc1.bind(P("X"), P("h(Y)"));
  cyc2.bind(P("Y"), P("xor(X, a)"));
  CHECK_THROWS_AS(combine(cyc1, cyc2, CombinationChoice{}, {}), Conflict);
}

TEST_CASE("mgu_combined: the worked example") {
  Term t = P("penc([1, n_a]; pk(B))");
  Term u = P("xor(penc([1, N_B]; pk(a)), [2, A], [2, b])");
  auto r = mgu_combined(t, u);
  REQUIRE(r.size() == 1);
  CHECK(to_string(r[0]) == "{b/A, a/B, n_a/N_B}");
  // ground oracle: a/B is forced
  for (const Term& bval : oracle::universe()) {
    Substitution g;
    g.bind(P("B"), bval);
    g.bind(P("A"), P("b"));
    g.bind(P("N_B"), P("n_a"));
    CHECK((acun_equal(apply(g, t), apply(g, u)) == (bval == P("a"))));
  }
}

TEST_CASE("mgu_combined small cases") {
  CHECK(mgu_combined(P("[a, X]"), P("[a, X]")).size() == 1);
  CHECK(mgu_combined(P("[a, X]"), P("[a, X]"))[0].empty());
  CHECK(mgu_combined(P("xor([#nonce, n_a], [#agent, b])"), P("xor([#nonce, n_b], [#key, b])")).empty());
  auto r = mgu_combined(P("xor(X, a)"), P("b"));
  REQUIRE(r.size() == 1);
  CHECK(to_string(r[0]) == "{xor(a,b)/X}");
  // untagged NSL: xor(N_A, b) against xor(n_a, i)
  auto nsl = mgu_combined(P("[2, xor(N_A, b), n_b]"), P("[2, xor(n_a, i), N_B]"));
  REQUIRE(nsl.size() == 1);
  CHECK(to_string(nsl[0]) == "{xor(i,b,n_a)/N_A, n_b/N_B}");
}

TEST_CASE("mgu_combined against the ground oracle") {
  oracle::ProblemGen g(2024);
  int unifiable = 0;
  for (int n = 0; n < 120; ++n) {
    auto [t, u] = g.problem();
    auto r = oracle::check_problem(t, u);
    INFO(to_string(t), " =? ", to_string(u));
    REQUIRE(r.soundness_failures == 0);
    REQUIRE(r.completeness_misses == 0);
    unifiable += r.unifiable;
  }
  CHECK(unifiable > 20);
}

TEST_CASE("unify_assoc") {
  auto r = unify_assoc(P("[a, b, X, 2]"), P("[a, b, [n_b, 3], 2]"));
  REQUIRE_FALSE(r.empty());
  bool found = false;
  for (const auto& s : r) found = found || apply(s, P("X")) == P("[n_b, 3]");
  CHECK(found);
  auto pre = unify_assoc(P("[a, b, n_b, 3]"), P("[A, B, N, 3]"));
  CHECK(pre.size() == 1);
  CHECK(unify_assoc(P("[a, b]"), P("[a, c]")).empty());
}

TEST_CASE("match and is_instance") {
  std::map<std::string, Term> rho;
  CHECK(match(P("[X, h(Y)]"), P("[a, h(b)]"), rho));
  CHECK(rho.at("X") == P("a"));
  std::map<std::string, Term> rho2;
  CHECK_FALSE(match(P("[X, X]"), P("[a, b]"), rho2));
  Substitution gen, spec;
  gen.bind(P("X"), P("h(Y)"));
  spec.bind(P("X"), P("h(a)"));
  spec.bind(P("Y"), P("a"));
  std::map<std::string, Term> vars{{"X", P("X")}, {"Y", P("Y")}};
  CHECK(is_instance(spec, gen, vars));
  CHECK_FALSE(is_instance(gen, spec, vars));
}
