#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "typeflaw/acun.hpp"
#include "typeflaw/analysis.hpp"
#include "typeflaw/dsl.hpp"
#include "typeflaw/parse.hpp"
#include "typeflaw/trace.hpp"

using namespace tf;

namespace {

constexpr int kUsage = 64;
constexpr int kVerifyFailed = 70;

struct Usage : Error {
  using Error::Error;
};

struct VerifyFailure : Error {
  using Error::Error;
};

struct Options {
  std::string protocol;
  std::string scenario;
  std::string theory = "acun";
  std::vector<std::string> rules;
  bool assoc_pairs = false;
  int max_depth = Limits{}.max_depth;
  std::size_t max_states = Limits{}.max_states;
  int xor_subset_bound = Limits{}.xor_subset_bound;
  bool verify = false;
  bool check_subterms = false;
  bool full_interleavings = false;
  bool json = false;
  std::string output;
  std::string scheme;
  std::string left, right;
  std::size_t max_solutions = 10;
};

bool has_xor(const Protocol& P) {
  for (const auto& r : P.roles)
    for (const auto& n : r.nodes)
      if (n.term.has_xor()) return true;
  return false;
}

bool use_acun(const Options& o) {
  if (o.theory == "acun") return true;
  if (o.theory == "std") return false;
  if (o.theory == "ACU" || o.theory == "ACUIdem" || o.theory == "AG" || o.theory == "acu" || o.theory == "acuidem" ||
      o.theory == "ag")
    throw Usage("unsupported theory " + o.theory + " (supported: std, acun)");
  throw Usage("unknown theory " + o.theory);
}

RuleSet rules_of(const Options& o, const Protocol* P) {
  RuleSet r;
  r.acun = use_acun(o);
  if (P && !r.acun && has_xor(*P)) throw Usage("protocol " + P->name + " contains xor terms; use --theory acun");
  for (const auto& name : o.rules) {
    if (name == "prefix")
      r.prefix = true;
    else if (name == "suffix")
      r.suffix = true;
    else if (name == "homomorphic")
      r.homomorphic = true;
    else if (name == "rsa-low-exp" || name == "rsa_low_exp")
      r.rsa_low_exp = true;
    else if (name == "guessing")
      r.guessing = true;
    else if (name == "assoc-pairs")
      r.assoc_pairs = true;
    else
      throw Usage("unknown rule " + name);
  }
  r.assoc_pairs = r.assoc_pairs || o.assoc_pairs;
  return r;
}

Limits limits_of(const Options& o) {
  if (o.max_depth <= 0 || o.max_states == 0 || o.xor_subset_bound < 2) throw Usage("limits must be positive");
  return Limits{o.max_depth, o.max_states, o.xor_subset_bound};
}

void write_output(const Options& o, const std::string& text) {
  if (o.output.empty() || o.output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(o.output, std::ios::binary);
  if (!out) throw Usage("cannot write " + o.output);
  out << text;
}

int check_nut_cmd(const Options& o) {
  Protocol P = load_protocol(o.protocol);
  NutReport r = check_nut(P);
  std::cout << P.name << ": " << (r.satisfied ? "NUT satisfied" : "NUT violated") << "\n";
  for (const auto& v : r.violations) std::cout << "  " << v.message << "\n";
  return r.satisfied ? 0 : 1;
}

int tag_cmd(const Options& o) {
  Protocol P = load_protocol(o.protocol);
  Protocol T;
  if (o.scheme == "numbers")
    T = tag_component_numbers(P);
  else if (o.scheme == "detailed-xor")
    T = tag_types(P, true);
  else if (o.scheme == "types")
    T = tag_types(P, true, true);
  else
    throw Usage("unknown scheme " + o.scheme);
  T.name = P.name + "_" + (o.scheme == "detailed-xor" ? std::string("xor_tagged") : o.scheme + "_tagged");
  write_output(o, print_protocol(T));
  return 0;
}

// The recorded satisfier, applied to its own sequence, must leave a satisfiable sequence.
void verify_trace(const AttackVerdict& v, const SolveOptions& base) {
  if (!v.sequence || v.kind == VerdictKind::NoAttackWithinBounds) return;
  ConstraintSequence C;
  for (const auto& c : v.sequence->constraints) {
    Constraint d{apply(v.sigma, c.target), {}};
    for (const Term& t : c.knowledge) d.knowledge.insert(apply(v.sigma, t));
    C.constraints.push_back(std::move(d));
  }
  SolveOptions opt = base;
  opt.stop = [](const Solution&) { return true; };
  if (solve(C, opt).solutions.empty())
    throw VerifyFailure("trace-replay: the trace substitution does not satisfy its constraint sequence");
}

int analyze_cmd(const Options& o) {
  if (o.scenario.empty()) throw Usage("analyze needs --scenario");
  Protocol P = load_protocol(o.protocol);
  Scenario sc = load_scenario(o.scenario);
  SemiBundle S = build_semibundle(P, sc);
  AnalysisConfig cfg;
  cfg.rules = rules_of(o, &P);
  cfg.rules.assoc_pairs = cfg.rules.assoc_pairs || S.assoc_pairs;
  cfg.limits = limits_of(o);
  cfg.check_subterms = o.check_subterms || o.verify;
  cfg.reduced_interleavings = !o.full_interleavings;
  AttackVerdict v = find_typeflaw(S, cfg);
  AttackTrace t = make_trace(v, S, P.name, sc.name);

  if (o.json)
    write_output(o, write_trace_json(t));
  else {
    std::cout << render_alice_bob(t);
    if (!o.output.empty()) write_output(o, write_trace_json(t));
  }
  std::cerr << "sequences " << v.sequences << ", states " << v.stats.states << ", unifiers " << v.stats.unifiers
            << " (ill-typed " << v.stats.ill_typed_unifiers << "), exhausted " << (v.exhausted ? "yes" : "no")
            << "\n";

  if (o.verify) {
    // with weakness rules off, a NUT protocol only admits well-typed unifiers
    if (!cfg.rules.any_weakness() && check_nut(P).satisfied && v.stats.ill_typed_unifiers > 0)
      throw VerifyFailure("well-typed-unifiers: " + std::to_string(v.stats.ill_typed_unifiers) +
                          " ill-typed unifiers on a NUT-satisfying protocol");
    if (!cfg.rules.acun && !cfg.rules.any_weakness() && !cfg.rules.assoc_pairs && v.stats.subterm_violations > 0)
      throw VerifyFailure("subterm-steps: " + std::to_string(v.stats.subterm_violations) +
                          " solver steps added non-subterms");
    SolveOptions base;
    base.rules = cfg.rules;
    base.limits = cfg.limits;
    base.weak_keys = S.weak_keys;
    verify_trace(v, base);
  }
  switch (v.kind) {
    case VerdictKind::TypeFlawAttack: return 2;
    case VerdictKind::WellTypedAttackExists: return 3;
    case VerdictKind::NoAttackWithinBounds: return 0;
  }
  return 0;
}

int unify_cmd(const Options& o) {
  Term a = parse_term(o.left), b = parse_term(o.right);
  std::vector<Substitution> us;
  if (use_acun(o)) {
    us = mgu_combined(a, b);
  } else {
    if (a.has_xor() || b.has_xor()) throw Usage("xor terms need --theory acun");
    if (auto s = mgu_syntactic(a, b)) us.push_back(*s);
  }
  if (us.empty()) {
    std::cout << "no unifier\n";
    return 1;
  }
  for (const auto& s : us) std::cout << to_string(s) << "\n";
  return 0;
}

int solve_cmd(const Options& o) {
  if (o.scenario.empty()) throw Usage("solve needs --scenario");
  Protocol P = load_protocol(o.protocol);
  Scenario sc = load_scenario(o.scenario);
  SemiBundle S = build_semibundle(P, sc);
  SolveOptions opt;
  opt.rules = rules_of(o, &P);
  opt.rules.assoc_pairs = opt.rules.assoc_pairs || S.assoc_pairs;
  opt.limits = limits_of(o);
  opt.weak_keys = S.weak_keys;
  opt.check_subterms = o.check_subterms;
  std::size_t found = 0;
  const std::size_t cap = o.max_solutions;
  opt.stop = [&](const Solution&) { return ++found >= cap; };
  std::size_t n = 0, total = 0;
  for (const auto& C : constraint_sequences(S, !o.full_interleavings)) {
    ++n;
    found = 0;
    SolveResult r = solve(C, opt);
    if (r.solutions.empty()) continue;
    std::cout << "sequence " << n << ":\n" << to_string(C);
    for (const auto& s : r.solutions)
      std::cout << "  " << to_string(s.sigma) << (is_well_typed(s.sigma) ? "" : "  ill-typed") << "\n";
    total += r.solutions.size();
  }
  std::cout << total << " satisfiers over " << n << " sequences\n";
  return total ? 0 : 1;
}

void add_limits(CLI::App* c, Options& o) {
  c->add_option("--theory", o.theory, "std or acun")->capture_default_str();
  c->add_option("--rules", o.rules, "weakness rules: prefix suffix homomorphic rsa-low-exp guessing assoc-pairs")
      ->delimiter(',');
  c->add_flag("--assoc-pairs", o.assoc_pairs, "associative pairing");
  c->add_option("--max-depth", o.max_depth)->capture_default_str();
  c->add_option("--max-states", o.max_states)->capture_default_str();
  c->add_option("--xor-subset-bound", o.xor_subset_bound)->capture_default_str();
  c->add_flag("--full-interleavings", o.full_interleavings, "enumerate every interleaving");
  c->add_flag("--check-subterms", o.check_subterms, "count steps that add non-subterms");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"typeflaw: type-flaw attack search under XOR"};
  app.require_subcommand(1);
  Options o;

  auto* nut = app.add_subcommand("check-nut", "check the NUT tagging condition");
  nut->add_option("protocol", o.protocol)->required()->check(CLI::ExistingFile);

  auto* tag = app.add_subcommand("tag", "write a tagged protocol");
  tag->add_option("protocol", o.protocol)->required()->check(CLI::ExistingFile);
  tag->add_option("--scheme", o.scheme)->required()->check(CLI::IsMember({"numbers", "types", "detailed-xor"}));
  tag->add_option("-o,--output", o.output);

  auto* analyze = app.add_subcommand("analyze", "search for a type-flaw attack");
  analyze->add_option("protocol", o.protocol)->required()->check(CLI::ExistingFile);
  analyze->add_option("--scenario", o.scenario)->required()->check(CLI::ExistingFile);
  add_limits(analyze, o);
  analyze->add_flag("--verify", o.verify, "check solver invariants, exit 70 on failure");
  analyze->add_flag("--json", o.json, "print the JSON trace instead of the Alice-Bob rendering");
  analyze->add_option("-o,--output", o.output, "write the JSON trace here");

  auto* unify = app.add_subcommand("unify", "print a complete set of unifiers");
  unify->add_option("left", o.left)->required();
  unify->add_option("right", o.right)->required();
  unify->add_option("--theory", o.theory)->capture_default_str();

  auto* solve = app.add_subcommand("solve", "list satisfiers of every constraint sequence");
  solve->add_option("protocol", o.protocol)->required()->check(CLI::ExistingFile);
  solve->add_option("--scenario", o.scenario)->required()->check(CLI::ExistingFile);
  solve->add_option("--max-solutions", o.max_solutions)->capture_default_str();
  add_limits(solve, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*nut) return check_nut_cmd(o);
    if (*tag) return tag_cmd(o);
    if (*analyze) return analyze_cmd(o);
    if (*unify) return unify_cmd(o);
    if (*solve) return solve_cmd(o);
  } catch (const VerifyFailure& e) {
    std::cerr << "verify failed: " << e.what() << "\n";
    return kVerifyFailed;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
