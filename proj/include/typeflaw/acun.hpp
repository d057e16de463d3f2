#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "typeflaw/unify.hpp"

namespace tf {

enum class Theory { STD, ACUN };

struct PureProblem {
  Theory theory = Theory::STD;
  std::vector<Equation> equations;
};

struct Purified {
  std::vector<PureProblem> problems;  // at most one STD and one ACUN problem
  std::map<std::string, Term> abstraction;  // _Wn -> the alien term it stands for
};

// Abstraction variables are named _W1, _W2, ... numbering from `first_index`.
Purified purify(const std::vector<Equation>& eqs, int first_index = 1);

// ACUN unification with free constants by Gaussian elimination over GF(2).
// Every variable of p is an unknown; atoms and constants are free constants.
std::vector<Substitution> unify_acun(const PureProblem& p);

// Elimination with linear constant restrictions. `rank` orders the symbols; a variable
// may only be bound to a sum of symbols of strictly smaller rank. Symbols for which
// `unknown` is false are treated as constants.
std::optional<Substitution> unify_acun_ordered(const std::vector<Equation>& eqs,
                                               const std::function<int(const Term&)>& rank,
                                               const std::function<bool(const Term&)>& unknown);

struct CombinationChoice {
  std::vector<std::vector<Term>> identification;      // classes; the first member is the representative
  std::map<std::string, Theory> theory_assignment;         // representative -> theory owning it as a variable
  std::vector<std::string> ordering;                       // representatives, smallest first
};

// Merge pure solutions into a substitution on the original variables.
// Throws Conflict if the pieces are cyclic.
Substitution combine(const Substitution& sigma_std, const Substitution& sigma_acun, const CombinationChoice& choice,
                     const std::map<std::string, Term>& abstraction);

// Complete set of unifiers modulo STD + ACUN.
std::vector<Substitution> mgu_combined(const Term& t, const Term& u);
std::vector<Substitution> mgu_combined(const std::vector<Equation>& eqs);

// Equality modulo ACUN.
inline bool acun_equal(const Term& a, const Term& b) { return xor_normalize(a) == xor_normalize(b); }

}  // namespace tf
