#include <functional>

#include "typeflaw/protocol.hpp"

namespace tf {

const Strand* Protocol::role(const std::string& name) const {
  for (const auto& r : roles)
    if (r.role_name == name) return &r;
  return nullptr;
}

namespace {

void strand_vars(const Strand& s, std::map<std::string, Term>& out) {
  for (const auto& n : s.nodes) {
    collect_vars(n.term, out);
    if (n.peer) collect_vars(*n.peer, out);
  }
}

void collect_consts(const Term& t, TermSet& out) {
  if (t.is_const() && !t.is_zero()) out.insert(t);
  for (const Term& a : t.args()) collect_consts(a, out);
}

}  // namespace

std::optional<Term> role_owner(const Strand& role) {
  std::map<std::string, Term> vars;
  strand_vars(role, vars);
  auto it = vars.find(role.role_name);
  if (it == vars.end()) return std::nullopt;
  return it->second;
}

Strand instantiate_role(const Strand& role, const Substitution& sigma, const std::string& label) {
  std::map<std::string, Term> vars;
  strand_vars(role, vars);
  for (const auto& [name, b] : sigma.bindings()) {
    if (!vars.count(name)) throw UnknownVariable("role " + role.role_name + " has no variable " + name);
    if (!type_matches(b.var.declared_type(), type_of(b.value)))
      throw IllTypedHonestSubstitution(to_string(b.value) + " is not of type " + to_string(b.var.declared_type()) +
                                       " required by " + name);
  }
  std::map<std::string, std::string> renaming;
  for (const auto& [name, v] : vars)
    if (!sigma.binds(name)) renaming[name] = name + "_" + label;
  Strand out;
  out.role_name = role.role_name;
  out.label = label;
  for (const auto& n : role.nodes) {
    Node m{n.sign, rename_vars(apply(sigma, n.term), renaming), std::nullopt};
    if (n.peer) m.peer = rename_vars(apply(sigma, *n.peer), renaming);
    out.nodes.push_back(std::move(m));
  }
  return out;
}

TermSet initial_knowledge(const std::vector<Strand>& strands, const std::set<Term>& agents) {
  TermSet t0;
  Term i = mk_attacker();
  t0.insert(i);
  t0.insert(mk_pk(i));
  t0.insert(mk_zero());
  for (const Term& a : agents) {
    t0.insert(a);
    t0.insert(mk_pk(a));
    t0.insert(mk_sh(a, i));
  }
  for (const auto& s : strands)
    for (const auto& n : s.nodes) collect_consts(n.term, t0);
  return t0;
}

namespace {

ConstraintSequence build(const SemiBundle& S, const std::vector<NodeRef>& order) {
  ConstraintSequence C;
  C.order = order;
  TermSet known = S.initial_knowledge;
  for (const auto& r : order) {
    const Node& n = S.strands[r.strand].nodes[r.index];
    if (n.sign == Sign::Plus)
      known.insert(n.term);
    else
      C.constraints.push_back(Constraint{n.term, known});
  }
  return C;
}

bool only_minus(const Strand& s) {
  for (const auto& n : s.nodes)
    if (n.sign == Sign::Plus) return false;
  return true;
}

}  // namespace

std::vector<ConstraintSequence> constraint_sequences(const SemiBundle& S, bool reduced) {
  std::vector<ConstraintSequence> out;
  const std::size_t ns = S.strands.size();
  if (!reduced) {
    std::vector<std::size_t> next(ns, 0);
    std::vector<NodeRef> order;
    std::size_t total = 0;
    for (const auto& s : S.strands) total += s.nodes.size();
    std::function<void()> rec = [&] {
      if (order.size() == total) {
        out.push_back(build(S, order));
        return;
      }
      for (std::size_t s = 0; s < ns; ++s) {
        if (next[s] == S.strands[s].nodes.size()) continue;
        order.push_back({s, next[s]++});
        rec();
        --next[s];
        order.pop_back();
      }
    };
    rec();
    return out;
  }

  // a block is a '-' node with the '+' nodes that follow it
  std::vector<std::vector<std::vector<NodeRef>>> blocks(ns);
  std::vector<NodeRef> prefix, tail;
  for (std::size_t s = 0; s < ns; ++s) {
    const auto& nodes = S.strands[s].nodes;
    bool goal = only_minus(S.strands[s]);
    std::size_t j = 0;
    for (; j < nodes.size() && nodes[j].sign == Sign::Plus; ++j) prefix.push_back({s, j});
    for (; j < nodes.size(); ++j) {
      if (goal) {
        tail.push_back({s, j});
        continue;
      }
      if (nodes[j].sign == Sign::Minus) blocks[s].emplace_back();
      blocks[s].back().push_back({s, j});
    }
  }
  std::vector<std::size_t> next(ns, 0);
  std::vector<NodeRef> order = prefix;
  std::function<void()> rec = [&] {
    bool done = true;
    for (std::size_t s = 0; s < ns; ++s) {
      if (next[s] == blocks[s].size()) continue;
      done = false;
      const auto& b = blocks[s][next[s]++];
      order.insert(order.end(), b.begin(), b.end());
      rec();
      order.resize(order.size() - b.size());
      --next[s];
    }
    if (done) {
      std::vector<NodeRef> full = order;
      full.insert(full.end(), tail.begin(), tail.end());
      out.push_back(build(S, full));
    }
  };
  rec();
  return out;
}

void split_into(const Term& t, TermSet& out) {
  if (t.is_concat()) {
    for (const Term& e : t.args()) split_into(e, out);
  } else {
    out.insert(t);
  }
}

namespace {

void concat_into(const Term& t, const TermSet& T, std::vector<Constraint>& out) {
  if (t.is_concat()) {
    for (const Term& e : t.args()) concat_into(e, T, out);
  } else {
    out.push_back(Constraint{t, T});
  }
}

}  // namespace

ConstraintSequence normalize_sequence(const ConstraintSequence& C) {
  ConstraintSequence out;
  out.sigma = C.sigma;
  out.order = C.order;
  for (const auto& c : C.constraints) {
    TermSet T;
    for (const Term& u : c.knowledge) split_into(u, T);
    concat_into(c.target, T, out.constraints);
  }
  return out;
}

std::string to_string(const Constraint& c) {
  std::string s = to_string(c.target) + " : {";
  bool first = true;
  for (const Term& t : c.knowledge) {
    if (!first) s += ", ";
    first = false;
    s += to_string(t);
  }
  return s + "}";
}

std::string to_string(const ConstraintSequence& C) {
  std::string s;
  for (const auto& c : C.constraints) s += to_string(c) + "\n";
  return s;
}

}  // namespace tf
