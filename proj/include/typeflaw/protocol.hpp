#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "typeflaw/term.hpp"

namespace tf {

enum class Sign { Plus, Minus };

struct Node {
  Sign sign = Sign::Plus;
  Term term;
  std::optional<Term> peer;  // intended recipient of a '+', claimed sender of a '-'
};

struct Strand {
  std::string role_name;
  std::vector<Node> nodes;
  std::string label;  // instance label, e.g. "alpha"; empty for parametric roles
};

struct Protocol {
  std::string name;
  std::vector<Strand> roles;
  std::map<std::string, TypeTag> var_types;

  const Strand* role(const std::string& name) const;
};

using TermSet = std::set<Term>;

struct SemiBundle {
  std::vector<Strand> strands;
  std::vector<Substitution> honest;  // per strand
  TermSet initial_knowledge;
  TermSet weak_keys;
  bool assoc_pairs = false;
};

struct Constraint {
  Term target;
  TermSet knowledge;
};

struct NodeRef {
  std::size_t strand = 0;
  std::size_t index = 0;
};

struct ConstraintSequence {
  std::vector<Constraint> constraints;
  Substitution sigma;
  std::vector<NodeRef> order;  // the interleaving the sequence was built from
};

// The agent variable owning a role: a variable named like the role.
std::optional<Term> role_owner(const Strand& role);

// Applies a well-typed honest substitution and renames the remaining variables to Name_label.
Strand instantiate_role(const Strand& role, const Substitution& sigma, const std::string& label);

// Attacker name, its key, agents, their public keys, keys shared with the attacker,
// numerals and tags occurring in the strands, and 0.
TermSet initial_knowledge(const std::vector<Strand>& strands, const std::set<Term>& agents);

// reduced = false: every interleaving consistent with strand order.
// reduced = true: '+' nodes run as early as possible and strands of '-' nodes only run last;
// every other interleaving has a sequence with smaller term sets, so nothing is lost.
std::vector<ConstraintSequence> constraint_sequences(const SemiBundle& S, bool reduced = true);

// Eager (concat) on targets and (split) on term sets.
ConstraintSequence normalize_sequence(const ConstraintSequence& C);
void split_into(const Term& t, TermSet& out);

std::string to_string(const Constraint& c);
std::string to_string(const ConstraintSequence& C);

}  // namespace tf
