#include "doctest.h"
#include "fixtures.hpp"
#include "gen.hpp"
#include "typeflaw/analysis.hpp"
#include "typeflaw/parse.hpp"

using namespace tf;

namespace {

Term P(const std::string& s) { return parse_term(s); }

Protocol load(const std::string& f) { return load_protocol(fixtures::corpus(f)); }

bool same_messages(const Protocol& a, const Protocol& b) {
  if (a.roles.size() != b.roles.size()) return false;
  for (std::size_t r = 0; r < a.roles.size(); ++r) {
    if (a.roles[r].nodes.size() != b.roles[r].nodes.size()) return false;
    for (std::size_t i = 0; i < a.roles[r].nodes.size(); ++i)
      if (a.roles[r].nodes[i].term != b.roles[r].nodes[i].term) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("is_tagged") {
  CHECK(is_tagged(P("[#nonce, N_A]")));
  CHECK(is_tagged(P("[#agent, i]")));
  CHECK_FALSE(is_tagged(P("[#agent, N_A]")));
  CHECK_FALSE(is_tagged(P("[#nonce, N_A, B]")));
  CHECK_FALSE(is_tagged(P("N_A")));
}

TEST_CASE("check_nut on the NSL variants") {
  NutReport tagged = check_nut(load("nsl_xor_tagged.proto"));
  CHECK(tagged.satisfied);
  NutReport untagged = check_nut(load("nsl_xor.proto"));
  CHECK_FALSE(untagged.satisfied);
  bool names_xor = false;
  for (const auto& v : untagged.violations) {
    CHECK(v.clause == NutClause::UntaggedXorElement);
    for (const Term& w : v.witnesses) names_xor = names_xor || w == P("xor(N_A, B)");
  }
  CHECK(names_xor);
}

TEST_CASE("check_nut clause 1") {
  Protocol p = parse_protocol(R"(
var A, B : Agent
var N_A, N_B : Nonce
role A:
  send penc([N_A, A]; pk(B))
  recv penc([A, N_B]; pk(B))
)");
  NutReport r = check_nut(p);
  REQUIRE_FALSE(r.satisfied);
  CHECK(r.violations[0].clause == NutClause::PairwiseUnifiable);
  // component numbers separate the two
  CHECK(check_nut(tag_component_numbers(p)).satisfied);
}

TEST_CASE("compound_terms collects nested terms once") {
  Protocol p = load("woolam_numbered.proto");
  auto ct = compound_terms(p);
  CHECK(ct.size() == 4);
}

TEST_CASE("detailed-xor tagging reproduces the tagged NSL") {
  Protocol t = tag_types(load("nsl_xor.proto"), true);
  CHECK(same_messages(t, load("nsl_xor_tagged.proto")));
  CHECK(check_nut(t).satisfied);
  // already tagged elements are left alone
  CHECK(same_messages(tag_types(t, true), t));
}

TEST_CASE("component numbers") {
  Protocol p = tag_component_numbers(load("gong.proto"));
  const auto& A = p.roles[0];
  CHECK(A.nodes[0].term == P("penc([1, A, B, N_A]; pk(B))"));
  CHECK(A.nodes[1].term == P("senc([2, N_A, K]; passwd(A, B))"));
  CHECK(p.roles[1].nodes[1].term == A.nodes[1].term);
}

TEST_CASE("type tags retype opaque variables") {
  Protocol p = tag_types(load("woolam_numbered.proto"), true, true);
  TypeTag x = p.var_types.at("X");
  CHECK(to_string(x) == "senc([[Tag,Agent],[Tag,Agent],[Tag,Nonce],[Tag,Number]];Key)");
  CHECK(check_nut(p).satisfied);
}

TEST_CASE("tag pipeline output satisfies NUT for every corpus protocol") {
  for (const char* f : {"nsl_xor.proto", "nsl_xor_tagged.proto", "woolam_numbered.proto", "woolam_typed.proto",
                        "gong.proto", "coppersmith.proto"}) {
    INFO(std::string(f));
    Protocol p = load(f);
    CHECK(check_nut(tag_types(p, true, true)).satisfied);
    CHECK(check_nut(tag_types(tag_component_numbers(p), true)).satisfied);
  }
}

TEST_CASE("numbers then detailed-xor tags give NUT on generated protocols") {
  gen::ProtocolGen g(3);
  for (int n = 0; n < 150; ++n) {
    Protocol p = g.protocol();
    Protocol t = tag_types(tag_component_numbers(p), true);
    NutReport r = check_nut(t);
    std::string why = r.violations.empty() ? "" : r.violations[0].message;
    INFO(why);
    REQUIRE(r.satisfied);
  }
}

TEST_CASE("find_typeflaw on the corpus") {
  AnalysisConfig cfg;
  AttackVerdict v = find_typeflaw(fixtures::bundle("nsl_xor.proto", "two_session.scen"), cfg);
  REQUIRE(v.kind == VerdictKind::TypeFlawAttack);
  CHECK(apply(v.sigma, P("N_A_beta")) == P("xor(n_a, b, i)"));
  CHECK(v.sequence.has_value());

  AttackVerdict t = find_typeflaw(fixtures::bundle("nsl_xor_tagged.proto", "two_session.scen"), cfg);
  CHECK(t.kind == VerdictKind::NoAttackWithinBounds);
  CHECK(t.exhausted);
  CHECK(t.stats.ill_typed_unifiers == 0);

  AnalysisConfig guess;
  guess.rules.guessing = true;
  AttackVerdict gv = find_typeflaw(fixtures::bundle("gong.proto", "gong.scen"), guess);
  CHECK(gv.kind == VerdictKind::WellTypedAttackExists);
  CHECK(find_typeflaw(fixtures::bundle("gong.proto", "gong.scen"), cfg).kind == VerdictKind::NoAttackWithinBounds);

  AnalysisConfig tiny;
  tiny.limits.max_states = 2;
  AttackVerdict b = find_typeflaw(fixtures::bundle("nsl_xor_tagged.proto", "two_session.scen"), tiny);
  CHECK(b.kind == VerdictKind::NoAttackWithinBounds);
  CHECK_FALSE(b.exhausted);
}

TEST_CASE("tagged generated protocols have no type-flaw attacks") {
  gen::ProtocolGen g(17);
  int runs = 0;
  for (int n = 0; n < 40; ++n) {
    Protocol p = tag_types(tag_component_numbers(g.protocol()), true);
    REQUIRE(check_nut(p).satisfied);
    // bind the owner and its own nonce; everything else is left to the attacker
    Scenario sc = parse_scenario("atom a, b : Agent\natom n_a, n_b : Nonce\n");
    StrandInstance alpha{"alpha", "A", {}}, beta{"beta", "B", {}};
    auto uses = [&](const char* role, const char* var) {
      for (const auto& n : p.role(role)->nodes)
        if (var_names(n.term).count(var) || (n.peer && var_names(*n.peer).count(var))) return true;
      return false;
    };
    if (uses("A", "A")) alpha.bindings.emplace_back("A", P("a"));
    if (uses("B", "B")) beta.bindings.emplace_back("B", P("b"));
    if (uses("A", "N_A")) alpha.bindings.emplace_back("N_A", P("n_a"));
    if (uses("B", "N_B")) beta.bindings.emplace_back("N_B", P("n_b"));
    sc.instances = {alpha, beta};
    AnalysisConfig cfg;
    cfg.limits.max_states = 20000;
    AttackVerdict v = find_typeflaw(build_semibundle(p, sc), cfg);
    INFO(print_protocol(p));
    CHECK(v.kind != VerdictKind::TypeFlawAttack);
    CHECK(v.stats.ill_typed_unifiers == 0);
    ++runs;
  }
  CHECK(runs == 40);
}
