#pragma once

#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "typeflaw/term.hpp"

namespace tf {

using Equation = std::pair<Term, Term>;

struct UnifyProblem {
  std::vector<Equation> equations;
};

// Free-theory mgu. Throws ImpureProblem if an XOR node occurs.
std::optional<Substitution> mgu_syntactic(const UnifyProblem& p);
std::optional<Substitution> mgu_syntactic(const Term& a, const Term& b);

// Same algorithm; XOR nodes are treated as ordinary constructors over their canonical element lists.
std::optional<Substitution> unify_free(const std::vector<Equation>& eqs);

// Unification with associative pairing: nested concatenations are flattened and a variable
// inside a concatenation may absorb a sub-sequence of length >= 2.
std::vector<Substitution> unify_assoc(const Term& a, const Term& b);

// Syntactic matching: extends rho so that rho(pattern) == target, target variables held rigid.
bool match(const Term& pattern, const Term& target, std::map<std::string, Term>& rho);

// True if `specific` is a syntactic instance of `general` on the given variables.
bool is_instance(const Substitution& specific, const Substitution& general, const std::map<std::string, Term>& vars);

}  // namespace tf
