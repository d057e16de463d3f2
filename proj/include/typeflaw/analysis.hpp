#pragma once

#include <string>
#include <vector>

#include "typeflaw/solver.hpp"

namespace tf {

enum class NutClause { PairwiseUnifiable, UntaggedXorElement };

struct NutViolation {
  NutClause clause;
  std::vector<Term> witnesses;
  std::string message;
};

struct NutReport {
  bool satisfied = true;
  std::vector<NutViolation> violations;
};

// Compound terms of a protocol: encryptions, hashes and signatures, collected recursively.
std::vector<Term> compound_terms(const Protocol& P);
NutReport check_nut(const Protocol& P);

// [#tag, x] with #tag naming the type of x.
bool is_tagged(const Term& t);

Protocol tag_component_numbers(const Protocol& P);
// detailed_xor: every XOR element becomes [#type, element].
// full: additionally every field of every message and encryption body, with #pair for nested pairs.
Protocol tag_types(const Protocol& P, bool detailed_xor, bool full = false);

enum class VerdictKind { TypeFlawAttack, NoAttackWithinBounds, WellTypedAttackExists };

struct AttackVerdict {
  VerdictKind kind = VerdictKind::NoAttackWithinBounds;
  Substitution sigma;
  std::vector<RuleStep> trace;
  std::optional<ConstraintSequence> sequence;
  bool exhausted = true;
  std::size_t sequences = 0;
  SolveStats stats;  // summed over all searches
  std::vector<std::string> subterm_witnesses;
};

struct AnalysisConfig {
  RuleSet rules;
  Limits limits;
  bool check_subterms = false;
  bool reduced_interleavings = true;
};

AttackVerdict find_typeflaw(const SemiBundle& S, const AnalysisConfig& cfg);

std::string to_string(VerdictKind k);

}  // namespace tf
