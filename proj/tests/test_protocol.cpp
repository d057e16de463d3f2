#include "deduce.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "gen.hpp"
#include "oracle.hpp"
#include "typeflaw/parse.hpp"

using namespace tf;

namespace {

Term P(const std::string& s) { return parse_term(s); }

Strand strand(const std::string& name, std::vector<Node> nodes) { return Strand{name, std::move(nodes), name}; }

SemiBundle bundle_of(std::vector<Strand> strands) {
  SemiBundle S;
  S.strands = std::move(strands);
  S.honest.resize(S.strands.size());
  S.initial_knowledge = initial_knowledge(S.strands, {});
  return S;
}

std::string order_labels(const SemiBundle& S, const ConstraintSequence& C) {
  std::string s;
  for (const auto& r : C.order) {
    if (S.strands[r.strand].role_name == "goal") continue;
    if (!s.empty()) s += ' ';
    s += S.strands[r.strand].label + "." + std::to_string(r.index + 1);
  }
  return s;
}

}  // namespace

TEST_CASE("a single receiving strand gives one sequence") {
  SemiBundle S = bundle_of({strand("r", {Node{Sign::Minus, P("X"), std::nullopt}})});
  auto seqs = constraint_sequences(S, false);
  REQUIRE(seqs.size() == 1);
  REQUIRE(seqs[0].constraints.size() == 1);
  CHECK(seqs[0].constraints[0].target == P("X"));
  CHECK(seqs[0].constraints[0].knowledge == S.initial_knowledge);
}

TEST_CASE("two strands: both interleavings in full mode") {
  SemiBundle S = bundle_of({strand("s", {Node{Sign::Plus, P("a"), std::nullopt}}),
                            strand("r", {Node{Sign::Minus, P("A"), std::nullopt}})});
  auto full = constraint_sequences(S, false);
  REQUIRE(full.size() == 2);
  std::set<std::size_t> sizes;
  for (const auto& C : full) sizes.insert(C.constraints[0].knowledge.size());
  CHECK(sizes.size() == 2);
  // the reduced enumeration keeps only the larger term set
  auto reduced = constraint_sequences(S, true);
  REQUIRE(reduced.size() == 1);
  CHECK(reduced[0].constraints[0].knowledge.count(P("a")) == 1);
}

TEST_CASE("every sequence respects origination") {
  for (auto [proto, scen] : {std::pair{"nsl_xor.proto", "two_session.scen"}, std::pair{"gong.proto", "gong.scen"}}) {
    SemiBundle S = fixtures::bundle(proto, scen);
    for (bool reduced : {false, true})
      for (const auto& C : constraint_sequences(S, reduced)) {
        TermSet sent;
        std::size_t k = 0;
        for (const auto& r : C.order) {
          const Node& n = S.strands[r.strand].nodes[r.index];
          if (n.sign == Sign::Plus) {
            sent.insert(n.term);
            continue;
          }
          for (const Term& t : C.constraints[k].knowledge)
            REQUIRE((S.initial_knowledge.count(t) || sent.count(t)));
          ++k;
        }
      }
  }
}

TEST_CASE("reduced interleavings of the two-session scenario contain the attack order") {
  SemiBundle S = fixtures::bundle("nsl_xor.proto", "two_session.scen");
  CHECK(S.strands.size() == 3);
  std::set<std::string> orders;
  for (const auto& C : constraint_sequences(S, true)) orders.insert(order_labels(S, C));
  CHECK(orders.count("alpha.1 beta.1 beta.2 alpha.2 alpha.3 beta.3") == 1);
  // full mode: 9 nodes, goal last or not, every consistent merge
  auto full = constraint_sequences(S, false);
  CHECK(full.size() > orders.size());
  std::set<std::string> all;
  for (const auto& C : full) all.insert(order_labels(S, C));
  for (const auto& o : orders) CHECK(all.count(o) == 1);
}

TEST_CASE("instances of one role have disjoint fresh variables") {
  Protocol proto = load_protocol(fixtures::corpus("nsl_xor.proto"));
  const Strand& B = *proto.role("B");
  Substitution s;
  s.bind(mk_var("B", TypeTag::agent()), P("b"));
  Strand x = instantiate_role(B, s, "x"), y = instantiate_role(B, s, "y");
  std::set<std::string> vx, vy;
  for (const auto& n : x.nodes)
    for (const auto& v : var_names(n.term)) vx.insert(v);
  for (const auto& n : y.nodes)
    for (const auto& v : var_names(n.term)) vy.insert(v);
  CHECK(vx == std::set<std::string>{"A_x", "N_A_x", "N_B_x"});
  for (const auto& v : vx) CHECK(vy.count(v) == 0);

  Substitution bad;
  bad.bind(mk_var("N_B", TypeTag::nonce()), P("b"));
  CHECK_THROWS_AS(instantiate_role(B, bad, "z"), IllTypedHonestSubstitution);
  Substitution unknown;
  unknown.bind(mk_var("K", TypeTag::key()), P("k"));
  CHECK_THROWS_AS(instantiate_role(B, unknown, "z"), UnknownVariable);
  Substitution attacker;
  attacker.bind(mk_var("A", TypeTag::agent()), mk_attacker());
  CHECK_NOTHROW(instantiate_role(B, attacker, "z"));
}

TEST_CASE("initial knowledge") {
  Strand s = strand("s", {Node{Sign::Plus, P("[3, #nonce, n_a]"), std::nullopt}});
  TermSet T0 = initial_knowledge({s}, {P("a")});
  for (const char* t : {"i", "pk(i)", "0", "a", "pk(a)", "sh(a, i)", "3", "#nonce"}) CHECK(T0.count(P(t)) == 1);
  CHECK(T0.count(P("n_a")) == 0);
}

TEST_CASE("normalize_sequence") {
  ConstraintSequence C;
  C.constraints.push_back(Constraint{P("[a, b]"), {P("c")}});
  C.constraints.push_back(Constraint{P("X"), {P("[a, [b, c]]")}});
  ConstraintSequence N = normalize_sequence(C);
  REQUIRE(N.constraints.size() == 3);
  CHECK(N.constraints[0].target == P("a"));
  CHECK(N.constraints[1].target == P("b"));
  CHECK(N.constraints[2].knowledge == TermSet{P("a"), P("b"), P("c")});
  ConstraintSequence NN = normalize_sequence(N);
  REQUIRE(NN.constraints.size() == N.constraints.size());
  for (std::size_t i = 0; i < N.constraints.size(); ++i) {
    CHECK(NN.constraints[i].target == N.constraints[i].target);
    CHECK(NN.constraints[i].knowledge == N.constraints[i].knowledge);
  }
}

TEST_CASE("normalize_sequence preserves satisfiers over a small universe") {
  gen::TermGen g(11);
  const Term X = oracle::variables()[0];
  g.vars = {X};
  int compared = 0, satisfied = 0;
  for (int n = 0; n < 150; ++n) {
    ConstraintSequence C;
    for (int k = 0; k < 2; ++k) {
      TermSet T{mk_attacker()};
      for (int j = 0; j < 3; ++j) T.insert(g.term(3));
      C.constraints.push_back(Constraint{g.term(3), T});
    }
    ConstraintSequence N = normalize_sequence(C);
    for (const Term& v : oracle::universe()) {
      Substitution s;
      s.bind(X, v);
      bool a = deduce::satisfies(s, C), b = deduce::satisfies(s, N);
      REQUIRE(a == b);
      ++compared;
      satisfied += a;
    }
  }
  CHECK(compared == 3000);
  CHECK(satisfied > 0);
}
