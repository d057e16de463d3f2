#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "typeflaw/protocol.hpp"

namespace tf {

struct RuleSet {
  bool acun = true;  // enables XOR_L, XOR_R and equational (un)
  bool prefix = false;
  bool suffix = false;
  bool homomorphic = false;
  bool rsa_low_exp = false;
  bool guessing = false;
  bool assoc_pairs = false;

  bool any_weakness() const { return prefix || suffix || homomorphic || rsa_low_exp || guessing; }
};

struct Limits {
  int max_depth = 200;
  std::size_t max_states = 500000;
  int xor_subset_bound = 4;
};

struct RuleStep {
  std::string rule;
  std::string detail;
};

struct TraceNode;
using TracePtr = std::shared_ptr<const TraceNode>;
struct TraceNode {
  RuleStep step;
  TracePtr parent;
};
std::vector<RuleStep> to_vector(const TracePtr& t);

struct Solution {
  Substitution sigma;
  std::vector<RuleStep> trace;
};

struct SolveStats {
  std::size_t states = 0;
  std::size_t memo_hits = 0;
  std::size_t unifiers = 0;
  std::size_t ill_typed_unifiers = 0;
  std::size_t subterm_violations = 0;
  std::size_t weakness_steps = 0;
  bool exhausted = true;  // no limit was hit
  bool stopped = false;   // the stop predicate ended the search
};

struct SolveOptions {
  RuleSet rules;
  Limits limits;
  TermSet weak_keys;
  bool well_typed_only = false;
  bool check_subterms = false;  // flag term-set additions that are not subterms of the state
  // Return true to end the search after this solution.
  std::function<bool(const Solution&)> stop;
};

struct SolveResult {
  std::vector<Solution> solutions;
  SolveStats stats;
  std::vector<std::string> subterm_witnesses;  // one line per flagged step
};

// Leftmost constraint whose target is not a variable.
std::optional<std::size_t> active_constraint(const std::vector<Constraint>& cs);

// Removes bare variables from the term set.
Constraint elim(const Constraint& c);

// One application of a named rule to the active constraint: concat, split, elim, pdec, sdec,
// sigdec, penc, senc, Hash, Sig, XOR_L, XOR_R, un, ksub, prefix, suffix, homomorphic,
// rsa_low_exp, guessing. Throws RuleNotApplicable when nothing results.
std::vector<ConstraintSequence> apply_rule(const std::string& rule, const ConstraintSequence& C,
                                           const SolveOptions& opt);

SolveResult solve(const ConstraintSequence& C, const SolveOptions& opt);

}  // namespace tf
